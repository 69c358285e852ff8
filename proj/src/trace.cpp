#include "zo/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zo {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
const char* kHeader = "k,i,cum_evals,beta,m_norm,s1,s2,best_f,wall_ms";

double parse_double(const std::string& tok) {
  std::size_t pos = 0;
  const double v = std::stod(tok, &pos);
  if (pos != tok.size()) throw std::runtime_error("trace: malformed number '" + tok + "'");
  return v;
}
}  // namespace

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << kHeader << '\n';
  for (const TraceRecord& r : trace) {
    os << r.k << ',' << r.i << ',' << r.cum_evals << ',' << format_g17(r.beta) << ','
       << format_g17(r.m_norm) << ',' << format_g17(r.s1) << ',' << format_g17(r.s2) << ','
       << format_g17(r.best_f) << ',' << format_g17(r.wall_ms) << '\n';
  }
}

void write_trace_csv_file(const std::string& path, const RunTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace_csv(os, trace);
  if (!os) throw std::runtime_error("failed while writing trace file: " + path);
}

RunTrace read_trace_csv(std::istream& is) {
  RunTrace trace;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace: empty stream");
  if (line != kHeader) throw std::runtime_error("trace: unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 9) throw std::runtime_error("trace: expected 9 columns, got line '" + line + "'");
    TraceRecord r;
    r.k = std::stoll(cols[0]);
    r.i = std::stoi(cols[1]);
    r.cum_evals = std::stoull(cols[2]);
    r.beta = parse_double(cols[3]);
    r.m_norm = parse_double(cols[4]);
    r.s1 = parse_double(cols[5]);
    r.s2 = parse_double(cols[6]);
    r.best_f = parse_double(cols[7]);
    r.wall_ms = parse_double(cols[8]);
    trace.push_back(r);
  }
  return trace;
}

RunTrace read_trace_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace_csv(is);
}

}  // namespace zo
