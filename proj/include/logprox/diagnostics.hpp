#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "logprox/optimality.hpp"
#include "logprox/trace.hpp"

namespace logprox {

/// Least-squares line through ln(f_k - f*) against k.
struct RateFit {
  double log_rate = 0.0;  // slope; the per-iteration contraction factor is exp(log_rate)
  double r_squared = 0.0;
  std::int64_t tail_start = 0;
  std::size_t points = 0;
};

/// Fits the trailing `tail_fraction` of the records whose gap exceeds `gap_floor`.
/// Throws InsufficientData with fewer than five usable points.
RateFit fit_linear_rate(const ConvergenceTrace& trace, double f_star, double tail_fraction = 0.5,
                        double gap_floor = 1e-14);

/// (k, max(0, f_k - f*)) for every record.
std::vector<std::pair<std::int64_t, double>> epsilon_optimality(const ConvergenceTrace& trace, double f_star);

/// First iteration whose gap is at most `eps`, or -1 if never reached.
std::int64_t iterations_to_gap(const ConvergenceTrace& trace, double f_star, double eps);

}  // namespace logprox
