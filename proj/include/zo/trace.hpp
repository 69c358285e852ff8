#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace zo {

// One convergence-trace row. k is the iteration count within the subproblem
// (0 marks the initialization record), i the subproblem index. wall_ms stays
// 0 unless timing was explicitly requested, so trace files are byte-stable
// across identically seeded runs.
struct TraceRecord {
  std::int64_t k = 0;
  int i = 0;
  std::uint64_t cum_evals = 0;
  double beta = 0.0;
  double m_norm = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double best_f = 0.0;
  double wall_ms = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

using RunTrace = std::vector<TraceRecord>;

// Shortest decimal with full round-trip fidelity (17 significant digits).
std::string format_g17(double v);

void write_trace_csv(std::ostream& os, const RunTrace& trace);
void write_trace_csv_file(const std::string& path, const RunTrace& trace);
RunTrace read_trace_csv(std::istream& is);
RunTrace read_trace_csv_file(const std::string& path);

}  // namespace zo
