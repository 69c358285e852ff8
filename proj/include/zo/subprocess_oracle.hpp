#pragma once

#include <memory>
#include <string>

#include "zo/oracle.hpp"

namespace zo {

struct SubprocessConfig {
  std::string command;        // run via /bin/sh -c
  int timeout_ms = 10000;     // per-evaluation reply deadline
};

// External blackbox speaking a line protocol on stdin/stdout:
//   request: n space-separated decimals, "\n"-terminated (17 significant
//            digits, full double round-trip)
//   reply:   one decimal, "\n"-terminated
// One request is in flight at a time; the child's lifetime is tied to the
// oracle. Exit, malformed replies and timeouts surface as EvalError.
std::unique_ptr<Oracle> make_subprocess_oracle(int n, const SubprocessConfig& cfg);

}  // namespace zo
