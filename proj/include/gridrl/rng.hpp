#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gridrl {

/// Deterministic random stream. One master seed fans out to named substreams
/// so that the assignment shuffle, profile noise, policy init and action
/// sampling each consume an independent sequence; adding draws to one stream
/// cannot perturb another. Uniform and normal variates are generated from the
/// raw mt19937_64 output (whose sequence the standard pins down) instead of
/// std::*_distribution, so runs are reproducible bit-for-bit.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  /// Derives an independent stream from this stream's seed and a label.
  /// Derivation uses the seed only, never the current generator position.
  RandomStream substream(std::string_view name) const {
    return RandomStream(mix(seed_, label_hash(name)));
  }

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; caches the spare variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    const double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  /// Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[integer(i)]);
    }
  }

  /// Textual engine state, suitable for checkpoints.
  std::string save_state() const {
    std::ostringstream out;
    out << gen_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    out.precision(17);
    out << spare_ << ' ' << seed_;
    return out.str();
  }

  void restore_state(const std::string& text) {
    std::istringstream in(text);
    int flag = 0;
    in >> gen_ >> flag >> spare_ >> seed_;
    has_spare_ = flag != 0;
  }

 private:
  static std::uint64_t label_hash(std::string_view name) {
    // FNV-1a over the label.
    std::uint64_t h = 1469598103934665603ull;
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t h = seed * 0x9e3779b97f4a7c15ull + label;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ull;
    h ^= h >> 33;
    return h;
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gridrl
