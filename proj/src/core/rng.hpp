#ifndef BBR_RNG_HPP
#define BBR_RNG_HPP

#include <cmath>
#include <cstdint>

namespace bbr {

// splitmix64 (Vigna 2015). Used for seeding and for deriving independent
// child streams from a (seed, index) pair.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream: xoshiro256++ core seeded via splitmix64.
/// Streams are value types; `split(i)` derives an independent child stream
/// so simulations can fan out without sharing state. All sampling methods
/// are implemented locally so that identical seeds give identical draws on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Child stream for worker `index`; deterministic function of (seed, index).
  Rng split(std::uint64_t index) const {
    std::uint64_t sm = seed_ ^ (0xA0761D6478BD642FULL * (index + 1));
    return Rng(splitmix64_next(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (one spare cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Student's t with 3 degrees of freedom, scaled. chi^2_3 built from
  /// three squared normals to keep the stream layout simple.
  double student_t3(double scale) {
    const double z = normal();
    double chisq = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double g = normal();
      chisq += g * g;
    }
    return scale * z / std::sqrt(chisq / 3.0);
  }

  /// Skew-normal(0, omega, alpha) via the Henze representation
  /// delta|u0| + sqrt(1-delta^2) v with delta = alpha/sqrt(1+alpha^2).
  double skew_normal(double omega, double alpha) {
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    const double u0 = normal();
    const double v = normal();
    return omega * (delta * std::fabs(u0) + std::sqrt(1.0 - delta * delta) * v);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bbr

#endif  // BBR_RNG_HPP
