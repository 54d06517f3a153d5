#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

namespace logprox {

struct TraceRecord {
  std::int64_t iter = 0;
  double wall_seconds = 0.0;
  double objective = 0.0;
  double primal_residual = 0.0;  // ||x1 - x2||, zero for single-block solvers
  double dual_residual = 0.0;    // rho ||x2_k - x2_{k-1}||, zero for single-block solvers
  double proxgrad_norm = 0.0;
};

/// Per-iteration history of a solver run. Iteration numbers are strictly increasing.
struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  void push(const TraceRecord& r) { records.push_back(r); }
};

/// CSV with header `iter,wall_s,objective,primal_res,dual_res,proxgrad_norm`
/// and 17 significant digits per float.
void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace);

}  // namespace logprox
