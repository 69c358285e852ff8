#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zo/rng.hpp"

namespace zo {

// Raised when a blackbox evaluation cannot produce a usable value (non-finite
// result, subprocess failure, timeout). Optimizer drivers abort the run on it.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoxBounds uniform(int n, double lo, double hi);
  int dimension() const { return static_cast<int>(lower.size()); }
  void validate() const;  // throws std::invalid_argument unless lower_j < upper_j
  bool contains(std::span<const double> x) const;
};

// Componentwise clamp of x into [lower, upper].
std::vector<double> project_box(std::span<const double> x, const BoxBounds& bounds);
void project_box_in_place(std::span<double> x, const BoxBounds& bounds);

struct NoiseModel {
  enum class Kind { none, additive_gaussian, additive_uniform, multiplicative_gaussian };

  Kind kind = Kind::none;
  double param = 0.0;  // sigma for gaussian kinds, half-width for uniform

  static NoiseModel none() { return {}; }
  static NoiseModel additive_gaussian(double sigma);
  static NoiseModel additive_uniform(double half_width);
  static NoiseModel multiplicative_gaussian(double sigma);

  bool is_none() const { return kind == Kind::none; }
  double apply(double clean, Rng& rng) const;
  void validate() const;

  static NoiseModel parse(const std::string& kind_name, double param);
  std::string kind_name() const;
};

// One draw of F(x, xi). The caller supplies the noise Rng so that concurrent
// batch evaluation stays deterministic: each call slot owns its own stream.
class Oracle {
 public:
  virtual ~Oracle() = default;

  int dimension() const { return n_; }

  double eval(std::span<const double> x, Rng& rng) const;

  std::uint64_t eval_count() const { return calls_.load(std::memory_order_relaxed); }
  void reset_eval_count() const { calls_.store(0, std::memory_order_relaxed); }

  virtual std::string name() const = 0;
  virtual bool supports_concurrent_eval() const { return true; }

  // Synthetic-problem facets; absent for external blackboxes.
  virtual bool has_noiseless() const { return false; }
  virtual double noiseless(std::span<const double> x) const;
  virtual bool has_analytic_gradient() const { return false; }
  virtual void analytic_gradient(std::span<const double> x, std::span<double> grad) const;
  // Lipschitz bound of F(., xi) in l2, declared on `declared_domain` only.
  virtual std::optional<double> lipschitz_l0() const { return std::nullopt; }
  virtual std::optional<BoxBounds> declared_domain() const { return std::nullopt; }

 protected:
  explicit Oracle(int n);
  virtual double eval_impl(std::span<const double> x, Rng& rng) const = 0;

 private:
  int n_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

// Test problems: "sphere", "quadratic", "rosenbrock", "abs-sum".
// data_seed feeds problem data only (the quadratic's matrix); noise draws come
// from the Rng passed to each eval call.
std::unique_ptr<Oracle> make_synthetic(const std::string& problem_id, int n,
                                       const NoiseModel& noise, std::uint64_t data_seed);

// Quadratic with explicit data: f(x) = 0.5 x^T A x + b^T x (A row-major n*n,
// assumed symmetric).
std::unique_ptr<Oracle> make_quadratic(int n, std::vector<double> a_matrix,
                                       std::vector<double> b_vector, const NoiseModel& noise);

// Fixed-value oracle, mostly for tests.
std::unique_ptr<Oracle> make_constant(int n, double value);

}  // namespace zo
