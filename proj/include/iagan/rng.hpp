#pragma once

#include <cstdint>
#include <string_view>

#include "iagan/tensor.hpp"

namespace iagan {

/// Counter-based random stream. Output i is a fixed hash of (key, i), so a
/// stream is reproducible bit-for-bit from its key. Forking derives a child
/// key from the parent key and a label; it never consumes parent state, so
/// substreams do not depend on the order in which they are created or drawn.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream fork(std::string_view label) const;
  RngStream fork(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal via Box-Muller on two uniforms.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t key, int);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. N(mean, std^2) samples. std = 0 yields a constant tensor.
Tensor sample_gaussian(RngStream& rng, const Shape& shape, double mean, double std);

}  // namespace iagan
