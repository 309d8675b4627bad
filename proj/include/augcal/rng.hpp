#pragma once

#include <cstdint>
#include <string_view>

namespace augcal {

// Deterministic seeded random stream. Draws are implemented by hand on top
// of splitmix64 so that sequences are identical across platforms and
// standard-library versions (std::uniform_int_distribution is
// implementation-defined and must not be used anywhere determinism matters).
//
// A stream has an immutable identity `key` and a mutable draw `state`.
// derive() builds a child stream from the key only, so children are
// unaffected by how many draws the parent has already made. Substreams for
// (question id, augmentation index, op index) are derived by chaining
// derive() calls.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed)), state_(key_) {}

  RngStream derive(std::uint64_t label) const {
    return RngStream(key_ ^ mix(label + 0x9e3779b97f4a7c15ULL), from_key{});
  }

  RngStream derive(std::string_view label) const {
    return derive(fnv1a(label));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform integer in [0, n). n must be > 0. Debiased via Lemire's
  // multiply-shift rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  struct from_key {};
  RngStream(std::uint64_t key, from_key) : key_(key), state_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace augcal
