#include "logprox/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "logprox/error.hpp"

namespace logprox {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
  os << "iter,wall_s,objective,primal_res,dual_res,proxgrad_norm\n";
  for (const auto& r : trace.records)
    os << r.iter << ',' << format_double(r.wall_seconds) << ',' << format_double(r.objective) << ','
       << format_double(r.primal_residual) << ',' << format_double(r.dual_residual) << ','
       << format_double(r.proxgrad_norm) << '\n';
}

RateFit fit_linear_rate(const ConvergenceTrace& trace, double f_star, double tail_fraction, double gap_floor) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");
  std::vector<std::pair<double, double>> usable;
  for (const auto& [k, gap] : epsilon_optimality(trace, f_star))
    if (gap > gap_floor) usable.emplace_back(static_cast<double>(k), std::log(gap));

  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(usable.size())));
  if (tail < 5)
    throw Error(ErrorCode::InsufficientData,
                "rate fit needs at least 5 points above the gap floor, have " + std::to_string(tail));
  const auto first = usable.end() - static_cast<std::ptrdiff_t>(tail);

  double mk = 0.0, ml = 0.0;
  for (auto it = first; it != usable.end(); ++it) {
    mk += it->first;
    ml += it->second;
  }
  mk /= static_cast<double>(tail);
  ml /= static_cast<double>(tail);
  double skk = 0.0, skl = 0.0, sll = 0.0;
  for (auto it = first; it != usable.end(); ++it) {
    const double dk = it->first - mk;
    const double dl = it->second - ml;
    skk += dk * dk;
    skl += dk * dl;
    sll += dl * dl;
  }
  RateFit fit;
  fit.tail_start = static_cast<std::int64_t>(first->first);
  fit.points = tail;
  fit.log_rate = skk > 0.0 ? skl / skk : 0.0;
  const double sse = sll - fit.log_rate * skl;
  // A constant series is fitted exactly by a flat line.
  fit.r_squared = sll > 0.0 ? std::clamp(1.0 - sse / sll, 0.0, 1.0) : 1.0;
  return fit;
}

std::vector<std::pair<std::int64_t, double>> epsilon_optimality(const ConvergenceTrace& trace, double f_star) {
  if (!std::isfinite(f_star)) throw Error(ErrorCode::InvalidArgument, "f_star must be finite");
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(trace.size());
  for (const auto& r : trace.records) out.emplace_back(r.iter, std::max(0.0, r.objective - f_star));
  return out;
}

std::int64_t iterations_to_gap(const ConvergenceTrace& trace, double f_star, double eps) {
  for (const auto& r : trace.records)
    if (r.objective - f_star <= eps) return r.iter;
  return -1;
}

}  // namespace logprox
