#pragma once

#include <cstdint>
#include <limits>

namespace metastab {

/// Purpose tags for keyed random streams. A stream is identified by
/// (seed, index, purpose); two experiments that must share randomness use
/// the same key, everything else gets an independent key.
enum class Purpose : std::uint64_t {
  TaskLaw = 1,
  Inner = 2,
  Outer = 3,
  Perturbation = 4,
  Batches = 5,
  Probes = 6,
  Population = 7,
  Coupling = 8,
  Constants = 9,
  Subsets = 10,
  TaskChoice = 11,
  TotalVariation = 12,
  Dataset = 13,
  Replicate = 14,
  Evaluation = 15,
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b);

/// Counter-based random stream: the k-th output is a pure function of
/// (key, k). Normal variates use Box-Muller so results do not depend on
/// the standard library's distribution implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : key_(key) {}
  Stream(std::uint64_t seed, std::uint64_t index, Purpose purpose);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  /// Independent child stream; does not advance this one.
  Stream derive(std::uint64_t sub) const { return Stream(combine_keys(key_, sub)); }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace metastab
