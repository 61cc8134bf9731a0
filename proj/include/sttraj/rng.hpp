#pragma once

#include <cstdint>
#include <limits>

namespace sttraj {

/// Counter-based generator. Every draw is a pure function of (key, counter),
/// so a stream is fully described by two integers and children derived with
/// `split` never overlap their parent in practice.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
      : key_(mix(key + 0x9E3779B97F4A7C15ULL)), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    return mix(key_ ^ mix(counter_++ * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  }

  /// Independent child stream identified by `tag`.
  constexpr CounterRng split(std::uint64_t tag) const noexcept {
    CounterRng child;
    child.key_ = mix(key_ ^ mix(tag + 0xA0761D6478BD642FULL));
    child.counter_ = 0;
    return child;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace sttraj
