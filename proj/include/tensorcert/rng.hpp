#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tensorcert {

/// Splittable counter-based random stream.
///
/// All randomness in the library flows from a single 64-bit seed through
/// this generator so that every artifact (instance files, experiment CSVs,
/// reports) is reproducible from the seed alone. The algorithm is fixed:
///
///   * outputs are SplitMix64 steps (Steele/Lea/Flood finalizer),
///   * substreams are derived by hashing a tag (FNV-1a 64) or an index
///     into the parent key and re-mixing,
///   * uniforms use the top 53 bits, gaussians use Box-Muller.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), state_(mix(key)) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double next_unit_positive() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_positive();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Substream keyed by a string tag; independent of the parent's position.
  RngStream child(std::string_view tag) const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a offset basis
    auto eat = [&h](std::uint64_t byte) {
      h ^= byte;
      h *= 0x100000001b3ull;
    };
    for (int s = 0; s < 64; s += 8) eat((key_ >> s) & 0xff);
    for (unsigned char c : tag) eat(c);
    return RngStream(h);
  }

  /// Substream keyed by an index (per-row, per-trial, per-cell splits).
  RngStream child(std::uint64_t index) const {
    return RngStream(mix(key_ ^ (0x9E3779B97F4A7C15ull * (index + 1))));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tensorcert
