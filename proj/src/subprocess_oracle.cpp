#include "zo/subprocess_oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>

#include "zo/trace.hpp"

namespace zo {

namespace {

class SubprocessOracle final : public Oracle {
 public:
  SubprocessOracle(int n, SubprocessConfig cfg) : Oracle(n), cfg_(std::move(cfg)) { spawn(); }

  ~SubprocessOracle() override { shutdown(); }

  std::string name() const override { return "subprocess"; }
  bool supports_concurrent_eval() const override { return false; }

 protected:
  double eval_impl(std::span<const double> x, Rng&) const override {
    std::lock_guard<std::mutex> lock(io_mutex_);
    if (pid_ < 0) throw EvalError("subprocess oracle: process is not running");

    std::string request;
    request.reserve(x.size() * 26);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) request.push_back(' ');
      request += format_g17(x[j]);
    }
    request.push_back('\n');

    if (!write_all(request)) {
      fail("subprocess oracle: write failed (process exited?)");
    }
    const std::string reply = read_line_with_deadline();
    return parse_reply(reply);
  }

 private:
  void spawn() {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw EvalError("subprocess oracle: pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw EvalError("subprocess oracle: fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", cfg_.command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    signal(SIGPIPE, SIG_IGN);
  }

  void shutdown() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
      kill(pid_, SIGTERM);
      int status = 0;
      for (int grace = 0; grace < 50; ++grace) {
        if (waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        usleep(10000);
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const_cast<SubprocessOracle*>(this)->shutdown();
    throw EvalError(msg);
  }

  bool write_all(const std::string& data) const {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t w = write(in_fd_, data.data() + off, data.size() - off);
      if (w < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(w);
    }
    return true;
  }

  std::string read_line_with_deadline() const {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg_.timeout_ms);
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) fail("subprocess oracle: reply timed out");
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{out_fd_, POLLIN, 0};
      const int pr = poll(&pfd, 1, static_cast<int>(left));
      if (pr == 0) fail("subprocess oracle: reply timed out");
      if (pr < 0) {
        if (errno == EINTR) continue;
        fail("subprocess oracle: poll() failed");
      }
      char chunk[4096];
      const ssize_t r = read(out_fd_, chunk, sizeof(chunk));
      if (r == 0) fail("subprocess oracle: process exited");
      if (r < 0) {
        if (errno == EINTR) continue;
        fail("subprocess oracle: read() failed");
      }
      buffer_.append(chunk, static_cast<std::size_t>(r));
    }
  }

  double parse_reply(const std::string& line) const {
    const char* s = line.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s) fail("subprocess oracle: malformed reply '" + line + "'");
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    if (*end != '\0') fail("subprocess oracle: malformed reply '" + line + "'");
    if (!std::isfinite(v)) fail("subprocess oracle: non-finite reply '" + line + "'");
    return v;
  }

  SubprocessConfig cfg_;
  mutable std::mutex io_mutex_;
  mutable std::string buffer_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
};

}  // namespace

std::unique_ptr<Oracle> make_subprocess_oracle(int n, const SubprocessConfig& cfg) {
  if (cfg.command.empty()) throw std::invalid_argument("subprocess oracle: empty command");
  if (cfg.timeout_ms <= 0) throw std::invalid_argument("subprocess oracle: timeout must be positive");
  return std::make_unique<SubprocessOracle>(n, cfg);
}

}  // namespace zo
