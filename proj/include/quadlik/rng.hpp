#pragma once

#include <cstdint>
#include <limits>

namespace quadlik {

/// Counter-based generator: the i-th output of a stream is a fixed hash of
/// (key, i), so a stream is fully described by its key and position.
/// split() derives child streams from the key alone, which makes results
/// independent of how work is scheduled across threads.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Child stream `index`; does not depend on how much of this stream has
  /// been consumed.
  Rng split(std::uint64_t index) const;

  result_type operator()();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double chi_squared(double dof);
  double exponential();

  std::uint64_t key() const { return key_; }

 private:
  Rng(std::uint64_t key, int) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace quadlik
