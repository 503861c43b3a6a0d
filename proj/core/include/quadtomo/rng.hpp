#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace quadtomo {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit seed is the key; `stream` selects an independent substream, so
// per-repeat and per-time generators can be derived from a single recorded
// seed without any shared state. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Skip ahead by `blocks` * 4 outputs.
  void discardBlocks(std::uint64_t blocks) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  // Raw ten-round bijection; exposed for known-answer tests.
  static Block encrypt(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  Block buffer_{};
  int used_ = 4;
};

// Deterministic substream identifier for (a, b), e.g. (repeat, time index).
std::uint64_t deriveStream(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace quadtomo
