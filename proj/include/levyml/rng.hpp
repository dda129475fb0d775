#pragma once

#include <cstdint>
#include <limits>

namespace levyml {

/// Counter-based random stream keyed by (global seed, stream index).
///
/// Draw n of stream (seed, k) is a pure function of (seed, k, n), so paths
/// can be simulated in any order or on any thread and reproduce bit-exactly.
/// Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace levyml
