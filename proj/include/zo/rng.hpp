#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace zo {

// Expands a 64-bit value into a well-mixed sequence (splitmix64).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Named randomness streams. Draws with the same (root, stream, index) key are
// identical; different keys are independent. This is what makes batched and
// multi-threaded evaluation bitwise reproducible: every consumer is handed an
// explicit draw index instead of sharing generator state.
enum class Stream : std::uint64_t {
  direction = 1,  // probe directions u
  noise = 2,      // oracle noise draws xi
  problem = 3,    // synthetic problem data (quadratic matrices, ...)
  summary = 4,    // fresh draws for post-run objective estimates
  replicate = 5,  // per-replicate diagnostics
};

// Counter-keyed xoshiro256++; cheap to construct per draw slot.
class Rng {
 public:
  Rng(std::uint64_t root, Stream stream, std::uint64_t index) {
    std::uint64_t h = root;
    (void)splitmix64(h);
    h ^= 0xd1b54a32d192ed03ull * static_cast<std::uint64_t>(stream);
    (void)splitmix64(h);
    h ^= 0xaef17502108ef2d9ull * (index + 1);
    s_[0] = splitmix64(h);
    s_[1] = splitmix64(h);
    s_[2] = splitmix64(h);
    s_[3] = splitmix64(h);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the spare is cached, so a single Rng
  // object yields a fixed sequence regardless of call grouping.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  void fill_standard_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  // Uniform direction on the unit sphere (normalized Gaussian).
  void fill_unit_sphere(std::span<double> out) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (double& v : out) {
        v = normal();
        norm_sq += v * v;
      }
    } while (norm_sq < 1e-24);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : out) v *= inv;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Allocates draw slots for one run. Drivers reserve a contiguous block per
// operation (one slot per oracle call / direction), then workers derive their
// Rng from (root, stream, slot) so parallel fan-out stays deterministic.
class RngSequencer {
 public:
  explicit RngSequencer(std::uint64_t root) : root_(root) {}

  std::uint64_t reserve(std::uint64_t n) {
    const std::uint64_t base = next_;
    next_ += n;
    return base;
  }

  Rng make(Stream stream, std::uint64_t slot) const { return Rng(root_, stream, slot); }

  std::uint64_t root() const { return root_; }
  std::uint64_t used() const { return next_; }

 private:
  std::uint64_t root_;
  std::uint64_t next_ = 0;
};

}  // namespace zo
