#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace slotfill {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Seeded 64-bit generator with labelled substreams.
///
/// Streams are derived from the parent seed and a fixed label, so enabling
/// dropout (say) never shifts the values drawn for initialization. All
/// conversions are done here rather than through <random> distributions,
/// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng stream(std::string_view label) const { return Rng(splitmix64(seed_ ^ fnv1a64(label))); }
  Rng stream(std::string_view label, std::uint64_t index) const {
    return Rng(splitmix64(stream(label).seed() + splitmix64(index)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  /// Uniform integer in [0, n), rejection-sampled. Requires n > 0.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform_open() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace slotfill
