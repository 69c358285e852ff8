#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zo/oracle.hpp"
#include "zo/rng.hpp"

namespace zo {

// Probe direction kernel. `gaussian_truncated` resamples any direction with
// ||u||_inf > 3, `uniform_sphere` draws on the unit sphere and scales the
// estimator by n.
enum class Kernel { gaussian, gaussian_truncated, uniform_sphere };

// Base-point evaluation strategy for the one-sided estimator. `shared`
// evaluates F(x, .) once per estimate and reuses it across the batch (q+1
// oracle calls); `per_sample` draws a fresh base value for every probe
// (2q calls).
enum class BaseMode { shared, per_sample };

struct SmoothingConfig {
  double beta = 0.1;  // smoothing radius, > 0
  int q = 1;          // probes per estimate, >= 1
  Kernel kernel = Kernel::gaussian;
  BaseMode base_mode = BaseMode::shared;

  std::uint64_t evals_per_estimate() const {
    return base_mode == BaseMode::shared ? static_cast<std::uint64_t>(q) + 1
                                         : 2ull * static_cast<std::uint64_t>(q);
  }
  void validate() const;
};

struct GradientEstimate {
  std::vector<double> g;
  std::uint64_t evals_used = 0;
  double min_observed = 0.0;  // smallest raw F value seen by this estimate
};

// Every oracle call the estimator makes, in a fixed slot order; used by the
// search-phase cache.
struct EvalRecord {
  std::vector<double> x;
  double value;
};

// Monte-Carlo value of the smoothed objective:
//   (1/N) sum_k F(x + beta u_k, xi_k),  u_k iid standard normal.
// Consumes exactly num_samples oracle evaluations.
double smoothed_value(const Oracle& oracle, std::span<const double> x, double beta,
                      std::uint64_t num_samples, RngSequencer& seq);

struct SmoothedValueStats {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};
SmoothedValueStats smoothed_value_stats(const Oracle& oracle, std::span<const double> x,
                                        double beta, std::uint64_t num_samples,
                                        RngSequencer& seq);

// One mini-batch one-sided estimate of grad f^beta(x).
GradientEstimate gradient_estimate(const Oracle& oracle, std::span<const double> x,
                                   const SmoothingConfig& cfg, RngSequencer& seq,
                                   std::vector<EvalRecord>* records = nullptr);

// Test seam: probe directions supplied by the caller (row-major q x n, used
// verbatim); base/noise slots still come from seq.
GradientEstimate gradient_estimate_with_directions(const Oracle& oracle,
                                                   std::span<const double> x, double beta,
                                                   std::span<const double> directions, int q,
                                                   BaseMode base_mode, RngSequencer& seq);

// Nested Monte-Carlo estimate of grad f^beta(x): the sample mean of `draws`
// independent gradient estimates, with per-component standard errors.
struct GradientStats {
  std::vector<double> mean;
  std::vector<double> se;
  std::uint64_t evals_used = 0;
  double norm() const;
};
GradientStats estimate_smoothed_gradient(const Oracle& oracle, std::span<const double> x,
                                         const SmoothingConfig& cfg, std::uint64_t draws,
                                         RngSequencer& seq);

// Serial reference implementations with the identical summation-order
// contract; the OpenMP kernels above must match them bitwise.
namespace reference {
double smoothed_value(const Oracle& oracle, std::span<const double> x, double beta,
                      std::uint64_t num_samples, RngSequencer& seq);
GradientStats estimate_smoothed_gradient(const Oracle& oracle, std::span<const double> x,
                                         const SmoothingConfig& cfg, std::uint64_t draws,
                                         RngSequencer& seq);
}  // namespace reference

}  // namespace zo
