#pragma once

#include <random>

#include <Eigen/Dense>

#include "logprox/graph.hpp"

namespace testing_support {

inline Eigen::VectorXd gaussian(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

// Diamond 0 -> {1, 2} -> 3.
inline logprox::Dag diamond() { return logprox::validate_dag(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}); }

// Boolean reachability by repeated squaring of (I + A) over (or, and).
inline std::vector<std::vector<bool>> reachability(const logprox::Dag& dag) {
  const auto n = static_cast<std::size_t>(dag.num_nodes());
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& [u, v] : dag.edges()) r[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
  for (std::size_t len = 1; len < n; len *= 2) {
    auto next = r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (r[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (r[k][j]) next[i][j] = true;
    r = std::move(next);
  }
  return r;
}

}  // namespace testing_support
