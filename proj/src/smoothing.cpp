#include "zo/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "zo/parallel.hpp"

namespace zo {

namespace {

// Samples are accumulated in fixed chunks and the chunk partials are reduced
// in ascending order. This is the summation-order contract shared by the
// serial reference and the OpenMP kernels, so both produce identical bits.
constexpr std::uint64_t kSampleChunk = 1024;
constexpr std::uint64_t kDrawChunk = 64;

// Below this probe count a single estimate runs serially; the parallel win
// lives at the sample/draw level.
constexpr int kParallelProbeThreshold = 256;

void draw_direction(Rng& rng, Kernel kernel, std::span<double> u) {
  switch (kernel) {
    case Kernel::gaussian:
      rng.fill_standard_normal(u);
      return;
    case Kernel::gaussian_truncated: {
      // Resample (rather than clip) until ||u||_inf <= 3; keeps the direction
      // distribution symmetric.
      for (;;) {
        rng.fill_standard_normal(u);
        double mx = 0.0;
        for (double v : u) mx = std::max(mx, std::abs(v));
        if (mx <= 3.0) return;
      }
    }
    case Kernel::uniform_sphere:
      rng.fill_unit_sphere(u);
      return;
  }
}

struct EstimateScratch {
  std::vector<double> dirs;        // q x n
  std::vector<double> probe;       // n
  std::vector<double> probe_vals;  // q
  std::vector<double> base_vals;   // 1 (shared) or q (per-sample)
};

// One mini-batch estimate with explicit slot base. Probe j draws its
// direction from slot base+j and its noise from slot base+j; the shared base
// evaluation uses slot base+q, per-sample bases use slots base+q+j.
void estimate_once(const Oracle& oracle, std::span<const double> x, const SmoothingConfig& cfg,
                   std::uint64_t root, std::uint64_t slot_base, std::span<double> g_out,
                   double* min_observed, EstimateScratch& ws,
                   std::vector<EvalRecord>* records) {
  const int n = oracle.dimension();
  const int q = cfg.q;
  ws.dirs.resize(static_cast<std::size_t>(q) * n);
  ws.probe.resize(n);
  ws.probe_vals.resize(q);
  const bool shared = cfg.base_mode == BaseMode::shared;
  ws.base_vals.resize(shared ? 1 : q);

  const auto eval_probe = [&](int j, std::span<double> probe_buf) {
    std::span<double> u(ws.dirs.data() + static_cast<std::size_t>(j) * n, n);
    Rng dir_rng(root, Stream::direction, slot_base + static_cast<std::uint64_t>(j));
    draw_direction(dir_rng, cfg.kernel, u);
    for (int c = 0; c < n; ++c) probe_buf[c] = x[c] + cfg.beta * u[c];
    Rng noise_rng(root, Stream::noise, slot_base + static_cast<std::uint64_t>(j));
    ws.probe_vals[j] = oracle.eval(probe_buf, noise_rng);
  };
  const auto eval_base = [&](int slot_offset, int store_idx) {
    Rng noise_rng(root, Stream::noise, slot_base + static_cast<std::uint64_t>(q) + slot_offset);
    ws.base_vals[store_idx] = oracle.eval(x, noise_rng);
  };

  const bool fan_out = oracle.supports_concurrent_eval() && q >= kParallelProbeThreshold;
  if (fan_out) {
    // Per-task probe buffers so workers never share scratch.
    std::vector<double> probe_mat(static_cast<std::size_t>(q) * n);
    parallel_for(static_cast<std::uint64_t>(q) + (shared ? 1 : q), true, [&](std::uint64_t t) {
      if (t < static_cast<std::uint64_t>(q)) {
        eval_probe(static_cast<int>(t),
                   std::span<double>(probe_mat.data() + static_cast<std::size_t>(t) * n, n));
      } else {
        eval_base(static_cast<int>(t) - q, shared ? 0 : static_cast<int>(t) - q);
      }
    });
  } else {
    for (int j = 0; j < q; ++j) eval_probe(j, ws.probe);
    if (shared) {
      eval_base(0, 0);
    } else {
      for (int j = 0; j < q; ++j) eval_base(j, j);
    }
  }

  // Reduce in probe-index order regardless of evaluation scheduling.
  std::fill(g_out.begin(), g_out.end(), 0.0);
  const double scale =
      (cfg.kernel == Kernel::uniform_sphere ? static_cast<double>(n) : 1.0) /
      (static_cast<double>(q) * cfg.beta);
  double min_obs = ws.probe_vals.empty() ? 0.0 : ws.probe_vals[0];
  for (int j = 0; j < q; ++j) {
    const double base = shared ? ws.base_vals[0] : ws.base_vals[j];
    const double coeff = (ws.probe_vals[j] - base) * scale;
    const double* u = ws.dirs.data() + static_cast<std::size_t>(j) * n;
    for (int c = 0; c < n; ++c) g_out[c] += u[c] * coeff;
    min_obs = std::min(min_obs, ws.probe_vals[j]);
  }
  for (double b : ws.base_vals) min_obs = std::min(min_obs, b);
  if (min_observed) *min_observed = min_obs;

  for (double v : g_out) {
    if (!std::isfinite(v)) throw EvalError("gradient estimate is non-finite");
  }

  if (records) {
    for (int j = 0; j < q; ++j) {
      const double* u = ws.dirs.data() + static_cast<std::size_t>(j) * n;
      EvalRecord rec;
      rec.x.resize(n);
      for (int c = 0; c < n; ++c) rec.x[c] = x[c] + cfg.beta * u[c];
      rec.value = ws.probe_vals[j];
      records->push_back(std::move(rec));
    }
    for (std::size_t b = 0; b < ws.base_vals.size(); ++b) {
      records->push_back(EvalRecord{std::vector<double>(x.begin(), x.end()), ws.base_vals[b]});
    }
  }
}

}  // namespace

void SmoothingConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("smoothing config: beta must be positive");
  }
  if (q < 1) throw std::invalid_argument("smoothing config: q must be >= 1");
}

double smoothed_value(const Oracle& oracle, std::span<const double> x, double beta,
                      std::uint64_t num_samples, RngSequencer& seq) {
  if (!(beta > 0.0)) throw std::invalid_argument("smoothed_value: beta must be positive");
  if (num_samples == 0) throw std::invalid_argument("smoothed_value: need at least one sample");
  const int n = oracle.dimension();
  const std::uint64_t base = seq.reserve(num_samples);
  const std::uint64_t chunks = (num_samples + kSampleChunk - 1) / kSampleChunk;
  std::vector<double> partials(chunks, 0.0);

  const bool par = oracle.supports_concurrent_eval() && num_samples >= 4 * kSampleChunk;
  parallel_for(chunks, par, [&](std::uint64_t c) {
    std::vector<double> u(n), probe(n);
    const std::uint64_t lo = c * kSampleChunk;
    const std::uint64_t hi = std::min(num_samples, lo + kSampleChunk);
    double sum = 0.0;
    for (std::uint64_t k = lo; k < hi; ++k) {
      Rng dir_rng(seq.root(), Stream::direction, base + k);
      dir_rng.fill_standard_normal(u);
      for (int c2 = 0; c2 < n; ++c2) probe[c2] = x[c2] + beta * u[c2];
      Rng noise_rng(seq.root(), Stream::noise, base + k);
      sum += oracle.eval(probe, noise_rng);
    }
    partials[c] = sum;
  });

  double total = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) total += partials[c];
  return total / static_cast<double>(num_samples);
}

GradientEstimate gradient_estimate(const Oracle& oracle, std::span<const double> x,
                                   const SmoothingConfig& cfg, RngSequencer& seq,
                                   std::vector<EvalRecord>* records) {
  cfg.validate();
  GradientEstimate est;
  est.g.resize(oracle.dimension());
  est.evals_used = cfg.evals_per_estimate();
  const std::uint64_t slot_base = seq.reserve(est.evals_used);
  EstimateScratch ws;
  estimate_once(oracle, x, cfg, seq.root(), slot_base, est.g, &est.min_observed, ws, records);
  return est;
}

GradientEstimate gradient_estimate_with_directions(const Oracle& oracle,
                                                   std::span<const double> x, double beta,
                                                   std::span<const double> directions, int q,
                                                   BaseMode base_mode, RngSequencer& seq) {
  if (!(beta > 0.0)) throw std::invalid_argument("gradient estimate: beta must be positive");
  const int n = oracle.dimension();
  if (directions.size() != static_cast<std::size_t>(q) * n) {
    throw std::invalid_argument("gradient estimate: directions shape mismatch");
  }
  GradientEstimate est;
  est.g.assign(n, 0.0);
  const bool shared = base_mode == BaseMode::shared;
  est.evals_used = shared ? static_cast<std::uint64_t>(q) + 1 : 2ull * q;
  const std::uint64_t slot_base = seq.reserve(est.evals_used);

  std::vector<double> probe(n);
  std::vector<double> probe_vals(q);
  std::vector<double> base_vals(shared ? 1 : q);
  for (int j = 0; j < q; ++j) {
    const double* u = directions.data() + static_cast<std::size_t>(j) * n;
    for (int c = 0; c < n; ++c) probe[c] = x[c] + beta * u[c];
    Rng noise_rng(seq.root(), Stream::noise, slot_base + static_cast<std::uint64_t>(j));
    probe_vals[j] = oracle.eval(probe, noise_rng);
  }
  for (std::size_t b = 0; b < base_vals.size(); ++b) {
    Rng noise_rng(seq.root(), Stream::noise, slot_base + static_cast<std::uint64_t>(q) + b);
    base_vals[b] = oracle.eval(x, noise_rng);
  }

  double min_obs = probe_vals[0];
  for (int j = 0; j < q; ++j) {
    const double base = shared ? base_vals[0] : base_vals[j];
    const double coeff = (probe_vals[j] - base) / (static_cast<double>(q) * beta);
    const double* u = directions.data() + static_cast<std::size_t>(j) * n;
    for (int c = 0; c < n; ++c) est.g[c] += u[c] * coeff;
    min_obs = std::min(min_obs, probe_vals[j]);
  }
  for (double b : base_vals) min_obs = std::min(min_obs, b);
  est.min_observed = min_obs;
  return est;
}

double GradientStats::norm() const {
  double s = 0.0;
  for (double v : mean) s += v * v;
  return std::sqrt(s);
}

GradientStats estimate_smoothed_gradient(const Oracle& oracle, std::span<const double> x,
                                         const SmoothingConfig& cfg, std::uint64_t draws,
                                         RngSequencer& seq) {
  cfg.validate();
  if (draws == 0) throw std::invalid_argument("estimate_smoothed_gradient: draws must be >= 1");
  const int n = oracle.dimension();
  const std::uint64_t per_draw = cfg.evals_per_estimate();
  const std::uint64_t base = seq.reserve(draws * per_draw);

  const std::uint64_t chunks = (draws + kDrawChunk - 1) / kDrawChunk;
  std::vector<double> sum(chunks * n, 0.0);
  std::vector<double> sum_sq(chunks * n, 0.0);

  const bool par = oracle.supports_concurrent_eval() && draws >= 4 * kDrawChunk;
  parallel_for(chunks, par, [&](std::uint64_t c) {
    EstimateScratch ws;
    std::vector<double> g(n);
    double* s = sum.data() + c * n;
    double* s2 = sum_sq.data() + c * n;
    const std::uint64_t lo = c * kDrawChunk;
    const std::uint64_t hi = std::min(draws, lo + kDrawChunk);
    for (std::uint64_t r = lo; r < hi; ++r) {
      estimate_once(oracle, x, cfg, seq.root(), base + r * per_draw, g, nullptr, ws, nullptr);
      for (int i = 0; i < n; ++i) {
        s[i] += g[i];
        s2[i] += g[i] * g[i];
      }
    }
  });

  GradientStats stats;
  stats.mean.assign(n, 0.0);
  stats.se.assign(n, 0.0);
  stats.evals_used = draws * per_draw;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    for (int i = 0; i < n; ++i) stats.mean[i] += sum[c * n + i];
  }
  const double r = static_cast<double>(draws);
  for (int i = 0; i < n; ++i) stats.mean[i] /= r;
  if (draws > 1) {
    for (int i = 0; i < n; ++i) {
      double ss = 0.0;
      for (std::uint64_t c = 0; c < chunks; ++c) ss += sum_sq[c * n + i];
      const double var = std::max(0.0, (ss - r * stats.mean[i] * stats.mean[i]) / (r - 1.0));
      stats.se[i] = std::sqrt(var / r);
    }
  }
  return stats;
}

namespace reference {

double smoothed_value(const Oracle& oracle, std::span<const double> x, double beta,
                      std::uint64_t num_samples, RngSequencer& seq) {
  if (!(beta > 0.0)) throw std::invalid_argument("smoothed_value: beta must be positive");
  if (num_samples == 0) throw std::invalid_argument("smoothed_value: need at least one sample");
  const int n = oracle.dimension();
  const std::uint64_t base = seq.reserve(num_samples);
  std::vector<double> u(n), probe(n);
  // Chunked accumulation: the declared summation order.
  double total = 0.0;
  for (std::uint64_t lo = 0; lo < num_samples; lo += kSampleChunk) {
    const std::uint64_t hi = std::min(num_samples, lo + kSampleChunk);
    double sum = 0.0;
    for (std::uint64_t k = lo; k < hi; ++k) {
      Rng dir_rng(seq.root(), Stream::direction, base + k);
      dir_rng.fill_standard_normal(u);
      for (int c = 0; c < n; ++c) probe[c] = x[c] + beta * u[c];
      Rng noise_rng(seq.root(), Stream::noise, base + k);
      sum += oracle.eval(probe, noise_rng);
    }
    total += sum;
  }
  return total / static_cast<double>(num_samples);
}

GradientStats estimate_smoothed_gradient(const Oracle& oracle, std::span<const double> x,
                                         const SmoothingConfig& cfg, std::uint64_t draws,
                                         RngSequencer& seq) {
  cfg.validate();
  if (draws == 0) throw std::invalid_argument("estimate_smoothed_gradient: draws must be >= 1");
  const int n = oracle.dimension();
  const std::uint64_t per_draw = cfg.evals_per_estimate();
  const std::uint64_t base = seq.reserve(draws * per_draw);

  EstimateScratch ws;
  std::vector<double> g(n);
  GradientStats stats;
  stats.mean.assign(n, 0.0);
  stats.se.assign(n, 0.0);
  stats.evals_used = draws * per_draw;

  std::vector<double> chunk_sum(n), chunk_sq(n);
  std::vector<double> total_sq(n, 0.0);
  for (std::uint64_t lo = 0; lo < draws; lo += kDrawChunk) {
    const std::uint64_t hi = std::min(draws, lo + kDrawChunk);
    std::fill(chunk_sum.begin(), chunk_sum.end(), 0.0);
    std::fill(chunk_sq.begin(), chunk_sq.end(), 0.0);
    for (std::uint64_t r = lo; r < hi; ++r) {
      estimate_once(oracle, x, cfg, seq.root(), base + r * per_draw, g, nullptr, ws, nullptr);
      for (int i = 0; i < n; ++i) {
        chunk_sum[i] += g[i];
        chunk_sq[i] += g[i] * g[i];
      }
    }
    for (int i = 0; i < n; ++i) {
      stats.mean[i] += chunk_sum[i];
      total_sq[i] += chunk_sq[i];
    }
  }
  const double r = static_cast<double>(draws);
  for (int i = 0; i < n; ++i) stats.mean[i] /= r;
  if (draws > 1) {
    for (int i = 0; i < n; ++i) {
      const double var = std::max(0.0, (total_sq[i] - r * stats.mean[i] * stats.mean[i]) / (r - 1.0));
      stats.se[i] = std::sqrt(var / r);
    }
  }
  return stats;
}

}  // namespace reference

}  // namespace zo
