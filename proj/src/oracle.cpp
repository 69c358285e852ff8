#include "zo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zo {

BoxBounds BoxBounds::uniform(int n, double lo, double hi) {
  BoxBounds b;
  b.lower.assign(static_cast<std::size_t>(n), lo);
  b.upper.assign(static_cast<std::size_t>(n), hi);
  b.validate();
  return b;
}

void BoxBounds::validate() const {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument("box bounds: lower/upper size mismatch");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) {
      throw std::invalid_argument("box bounds: lower must be strictly below upper");
    }
  }
}

bool BoxBounds::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  }
  return true;
}

std::vector<double> project_box(std::span<const double> x, const BoxBounds& bounds) {
  std::vector<double> out(x.begin(), x.end());
  project_box_in_place(out, bounds);
  return out;
}

void project_box_in_place(std::span<double> x, const BoxBounds& bounds) {
  if (x.size() != bounds.lower.size()) {
    throw std::invalid_argument("project_box: dimension mismatch");
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = std::max(bounds.lower[j], std::min(x[j], bounds.upper[j]));
  }
}

NoiseModel NoiseModel::additive_gaussian(double sigma) {
  NoiseModel m{Kind::additive_gaussian, sigma};
  m.validate();
  return m;
}

NoiseModel NoiseModel::additive_uniform(double half_width) {
  NoiseModel m{Kind::additive_uniform, half_width};
  m.validate();
  return m;
}

NoiseModel NoiseModel::multiplicative_gaussian(double sigma) {
  NoiseModel m{Kind::multiplicative_gaussian, sigma};
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (param < 0.0 || !std::isfinite(param)) {
    throw std::invalid_argument("noise model: parameter must be finite and >= 0");
  }
}

double NoiseModel::apply(double clean, Rng& rng) const {
  switch (kind) {
    case Kind::none:
      return clean;
    case Kind::additive_gaussian:
      return clean + param * rng.normal();
    case Kind::additive_uniform:
      return clean + rng.uniform(-param, param);
    case Kind::multiplicative_gaussian:
      return clean * (1.0 + param * rng.normal());
  }
  return clean;
}

NoiseModel NoiseModel::parse(const std::string& kind_name, double param) {
  NoiseModel m;
  if (kind_name == "none") {
    m.kind = Kind::none;
    m.param = 0.0;
    return m;
  }
  if (kind_name == "additive-gaussian") {
    m.kind = Kind::additive_gaussian;
  } else if (kind_name == "additive-uniform") {
    m.kind = Kind::additive_uniform;
  } else if (kind_name == "multiplicative-gaussian") {
    m.kind = Kind::multiplicative_gaussian;
  } else {
    throw std::invalid_argument("unknown noise kind: " + kind_name);
  }
  m.param = param;
  m.validate();
  return m;
}

std::string NoiseModel::kind_name() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::additive_gaussian: return "additive-gaussian";
    case Kind::additive_uniform: return "additive-uniform";
    case Kind::multiplicative_gaussian: return "multiplicative-gaussian";
  }
  return "none";
}

Oracle::Oracle(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("oracle dimension must be positive");
}

double Oracle::eval(std::span<const double> x, Rng& rng) const {
  if (static_cast<int>(x.size()) != n_) {
    throw std::invalid_argument("oracle eval: dimension mismatch");
  }
  calls_.fetch_add(1, std::memory_order_relaxed);
  const double value = eval_impl(x, rng);
  if (!std::isfinite(value)) {
    throw EvalError("oracle '" + name() + "' returned a non-finite value");
  }
  return value;
}

double Oracle::noiseless(std::span<const double>) const {
  throw std::logic_error("oracle '" + name() + "' has no noiseless form");
}

void Oracle::analytic_gradient(std::span<const double>, std::span<double>) const {
  throw std::logic_error("oracle '" + name() + "' has no analytic gradient");
}

namespace {

// Default declared domain for the synthetic problems.
constexpr double kDomainHalfWidth = 2.0;

class SyntheticOracle : public Oracle {
 public:
  SyntheticOracle(int n, NoiseModel noise) : Oracle(n), noise_(noise) {}

  bool has_noiseless() const override { return true; }

  std::optional<BoxBounds> declared_domain() const override {
    return BoxBounds::uniform(dimension(), -kDomainHalfWidth, kDomainHalfWidth);
  }

 protected:
  double eval_impl(std::span<const double> x, Rng& rng) const override {
    return noise_.apply(noiseless(x), rng);
  }

  NoiseModel noise_;
};

class SphereOracle final : public SyntheticOracle {
 public:
  using SyntheticOracle::SyntheticOracle;

  std::string name() const override { return "sphere"; }

  double noiseless(std::span<const double> x) const override {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  }

  bool has_analytic_gradient() const override { return true; }

  void analytic_gradient(std::span<const double> x, std::span<double> grad) const override {
    for (std::size_t j = 0; j < x.size(); ++j) grad[j] = 2.0 * x[j];
  }

  std::optional<double> lipschitz_l0() const override {
    // sup over the domain of ||2x||_2
    return 2.0 * kDomainHalfWidth * std::sqrt(static_cast<double>(dimension()));
  }
};

class AbsSumOracle final : public SyntheticOracle {
 public:
  using SyntheticOracle::SyntheticOracle;

  std::string name() const override { return "abs-sum"; }

  double noiseless(std::span<const double> x) const override {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }

  // Nonsmooth at coordinate zeros; no analytic gradient is exposed.

  std::optional<double> lipschitz_l0() const override {
    // |sum|x| - sum|y|| <= ||x-y||_1 <= sqrt(n) ||x-y||_2, everywhere
    return std::sqrt(static_cast<double>(dimension()));
  }
};

class RosenbrockOracle final : public SyntheticOracle {
 public:
  using SyntheticOracle::SyntheticOracle;

  std::string name() const override { return "rosenbrock"; }

  double noiseless(std::span<const double> x) const override {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const double a = x[j + 1] - x[j] * x[j];
      const double b = 1.0 - x[j];
      s += 100.0 * a * a + b * b;
    }
    return s;
  }

  bool has_analytic_gradient() const override { return true; }

  void analytic_gradient(std::span<const double> x, std::span<double> grad) const override {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const double a = x[j + 1] - x[j] * x[j];
      grad[j] += -400.0 * x[j] * a - 2.0 * (1.0 - x[j]);
      grad[j + 1] += 200.0 * a;
    }
  }

  std::optional<double> lipschitz_l0() const override {
    // Conservative coordinate-wise bound on [-w, w]^n.
    const double w = kDomainHalfWidth;
    const double dmax = 400.0 * w * (w + w * w) + 2.0 * (1.0 + w) + 200.0 * (w + w * w);
    return dmax * std::sqrt(static_cast<double>(dimension()));
  }
};

class QuadraticOracle final : public SyntheticOracle {
 public:
  QuadraticOracle(int n, std::vector<double> a, std::vector<double> b, NoiseModel noise)
      : SyntheticOracle(n, noise), a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n) ||
        b_.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("quadratic oracle: data size mismatch");
    }
  }

  std::string name() const override { return "quadratic"; }

  double noiseless(std::span<const double> x) const override {
    const int n = dimension();
    double s = 0.0;
    for (int r = 0; r < n; ++r) {
      double row = 0.0;
      for (int c = 0; c < n; ++c) row += a_[static_cast<std::size_t>(r) * n + c] * x[c];
      s += 0.5 * x[r] * row + b_[r] * x[r];
    }
    return s;
  }

  bool has_analytic_gradient() const override { return true; }

  void analytic_gradient(std::span<const double> x, std::span<double> grad) const override {
    const int n = dimension();
    for (int r = 0; r < n; ++r) {
      double row = 0.0;
      for (int c = 0; c < n; ++c) row += a_[static_cast<std::size_t>(r) * n + c] * x[c];
      grad[r] = row + b_[r];
    }
  }

  std::optional<double> lipschitz_l0() const override {
    // ||A x + b|| <= ||A||_F * ||x|| + ||b|| on the domain
    double fro = 0.0;
    for (double v : a_) fro += v * v;
    double bn = 0.0;
    for (double v : b_) bn += v * v;
    const double xmax = kDomainHalfWidth * std::sqrt(static_cast<double>(dimension()));
    return std::sqrt(fro) * xmax + std::sqrt(bn);
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

class ConstantOracle final : public Oracle {
 public:
  ConstantOracle(int n, double value) : Oracle(n), value_(value) {}
  std::string name() const override { return "constant"; }
  bool has_noiseless() const override { return true; }
  double noiseless(std::span<const double>) const override { return value_; }
  std::optional<double> lipschitz_l0() const override { return 0.0; }

 protected:
  double eval_impl(std::span<const double>, Rng&) const override { return value_; }

 private:
  double value_;
};

}  // namespace

std::unique_ptr<Oracle> make_quadratic(int n, std::vector<double> a_matrix,
                                       std::vector<double> b_vector, const NoiseModel& noise) {
  return std::make_unique<QuadraticOracle>(n, std::move(a_matrix), std::move(b_vector), noise);
}

std::unique_ptr<Oracle> make_constant(int n, double value) {
  return std::make_unique<ConstantOracle>(n, value);
}

std::unique_ptr<Oracle> make_synthetic(const std::string& problem_id, int n,
                                       const NoiseModel& noise, std::uint64_t data_seed) {
  if (n <= 0) throw std::invalid_argument("make_synthetic: n must be positive");
  if (problem_id == "sphere") return std::make_unique<SphereOracle>(n, noise);
  if (problem_id == "abs-sum") return std::make_unique<AbsSumOracle>(n, noise);
  if (problem_id == "rosenbrock") return std::make_unique<RosenbrockOracle>(n, noise);
  if (problem_id == "quadratic") {
    // Random symmetric positive definite A = M^T M / n + 0.5 I, b = 0.
    Rng rng(data_seed, Stream::problem, 0);
    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> m(nn * nn);
    for (double& v : m) v = rng.normal();
    std::vector<double> a(nn * nn, 0.0);
    for (std::size_t r = 0; r < nn; ++r) {
      for (std::size_t c = 0; c < nn; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < nn; ++k) s += m[k * nn + r] * m[k * nn + c];
        a[r * nn + c] = s / static_cast<double>(n);
      }
      a[r * nn + r] += 0.5;
    }
    return make_quadratic(n, std::move(a), std::vector<double>(nn, 0.0), noise);
  }
  throw std::invalid_argument("unknown problem id: " + problem_id);
}

}  // namespace zo
