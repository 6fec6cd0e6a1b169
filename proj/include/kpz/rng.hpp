#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).
//
// Every draw is a pure function of (seed, trajectory, stream, a, b), so a
// trajectory's randomness does not depend on which thread runs it or in what
// order other trajectories are processed.

#include <array>
#include <cstdint>
#include <limits>

namespace kpz::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

constexpr Block round(const Block& c, const Key& k) {
  std::uint32_t lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
  mulhilo(kM0, c[0], lo0, hi0);
  mulhilo(kM1, c[2], lo1, hi1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

constexpr Block philox4x32(Block ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    ctr = detail::round(ctr, key);
    key[0] += detail::kW0;
    key[1] += detail::kW1;
  }
  return ctr;
}

constexpr Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform on the 2^52 midpoints (k + 1/2) 2^-52, strictly inside (0, 1).
// With 53 bits the top midpoint would round to 1.0.
constexpr double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

// Stream tags separate the independent uses of one trajectory's key space.
enum class Tag : std::uint32_t {
  Boundary = 1,
  Vertex = 2,
  Geometric = 3,
  Asep = 4,
  Gue = 5,
  Generic = 6,
};

// Addresses draws by (trajectory, tag, a, b). Typical use: a = row, b = column.
class KeyedStream {
 public:
  constexpr KeyedStream(std::uint64_t seed, std::uint32_t trajectory, Tag tag,
                        std::uint32_t lane = 0)
      : key_(key_from_seed(seed)),
        trajectory_(trajectory),
        tag_((lane << 8) | static_cast<std::uint32_t>(tag)) {}

  constexpr Block block(std::uint32_t a, std::uint32_t b) const {
    return philox4x32({trajectory_, tag_, a, b}, key_);
  }

  constexpr double uniform(std::uint32_t a, std::uint32_t b) const {
    const Block r = block(a, b);
    return to_open_unit(r[0], r[1]);
  }

  constexpr KeyedStream with_tag(Tag tag) const {
    KeyedStream s = *this;
    s.tag_ = (tag_ & ~0xFFu) | static_cast<std::uint32_t>(tag);
    return s;
  }

  constexpr std::uint32_t trajectory() const { return trajectory_; }

 private:
  Key key_;
  std::uint32_t trajectory_;
  std::uint32_t tag_;
};

// Sequential view over a keyed stream: the 64-bit draw index is the counter.
class SequentialStream {
 public:
  using result_type = std::uint32_t;

  constexpr explicit SequentialStream(KeyedStream base) : base_(base) {}

  constexpr Block next_block() {
    const Block r = base_.block(static_cast<std::uint32_t>(index_ >> 32),
                                static_cast<std::uint32_t>(index_));
    ++index_;
    return r;
  }

  constexpr double uniform() {
    if (cached_) {
      cached_ = false;
      return to_open_unit(cache_[2], cache_[3]);
    }
    cache_ = next_block();
    cached_ = true;
    return to_open_unit(cache_[0], cache_[1]);
  }

  // UniformRandomBitGenerator interface, for <random> distributions.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  constexpr result_type operator()() {
    if (word_ == 4) {
      words_ = next_block();
      word_ = 0;
    }
    return words_[word_++];
  }

  constexpr std::uint64_t draws() const { return index_; }

 private:
  KeyedStream base_;
  std::uint64_t index_ = 0;
  Block cache_{};
  bool cached_ = false;
  Block words_{};
  int word_ = 4;
};

}  // namespace kpz::rng
