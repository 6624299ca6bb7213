#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace threshreg {

// Philox4x32-10 counter-based block cipher (Salmon et al., Random123 family).
// Stateless: output depends only on (counter, key), so independent streams
// are carved out of the counter space and replications are reproducible
// regardless of thread scheduling.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

// One logical random stream, keyed by (seed, stream, purpose). Streams with
// distinct (stream, purpose) pairs never overlap; `stream` is typically a
// replication index and must be < 2^32.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t purpose)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        prefix_{static_cast<std::uint32_t>(stream), purpose} {}

  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    const std::uint32_t lo = buf_[4 - have_];
    const std::uint32_t hi = buf_[4 - have_ + 1];
    have_ -= 2;
    return (std::uint64_t(hi) << 32) | lo;
  }

  // Uniform on (0, 1]; 53-bit resolution, never exactly 0 so log() is safe.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Student t with df degrees of freedom: z / sqrt(chi2_df / df).
  double student_t(int df) {
    const double z = gaussian();
    double chi2 = 0.0;
    for (int i = 0; i < df; ++i) {
      const double g = gaussian();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / df);
  }

 private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32),
                              prefix_[0], prefix_[1]},
                             key_);
    ++block_;
    have_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> prefix_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int have_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace threshreg
