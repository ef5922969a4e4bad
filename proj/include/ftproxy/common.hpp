#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ftproxy {

// Virtual or wall time, milliseconds. Doubles carry sub-millisecond event
// times exactly enough for the discrete-event core (same binary => same bits).
using TimeMs = double;

inline constexpr TimeMs kNoDeadline = 1e300;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<uint8_t>;

inline void put_u16be(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32be(Bytes& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<uint8_t>(v >> shift));
}

inline void put_u64be(Bytes& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<uint8_t>(v >> shift));
}

// Cursor over an immutable byte buffer; throws ProtocolError on underrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16be() {
    auto b = take(2);
    return static_cast<uint16_t>(b[0]) << 8 | b[1];
  }
  uint32_t u32be() {
    auto b = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | b[i];
    return v;
  }
  uint64_t u64be() {
    auto b = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | b[i];
    return v;
  }
  std::span<const uint8_t> take(size_t n) {
    if (pos_ + n > data_.size()) throw ProtocolError("truncated message body");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  Bytes rest() {
    auto s = data_.subspan(pos_);
    pos_ = data_.size();
    return Bytes(s.begin(), s.end());
  }
  std::string str16() {
    size_t n = u16be();
    auto s = take(n);
    return std::string(s.begin(), s.end());
  }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

std::string to_hex(std::span<const uint8_t> data);

// --- seeded sub-stream derivation -----------------------------------------
//
// Every stochastic stream in a scenario is keyed by (scenario seed, stable
// string key), so adding replicas, killing the discovery server, or changing
// topology never perturbs the streams of untouched components.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t base_seed, std::string_view key) {
  return splitmix64(base_seed ^ fnv1a64(key));
}

// mt19937_64-backed uniform source for the latency samplers.
class StreamRng {
 public:
  explicit StreamRng(uint64_t seed) : engine_(seed) {}
  StreamRng(uint64_t base_seed, std::string_view key)
      : engine_(derive_seed(base_seed, key)) {}

  // uniform in [0, 1)
  double uniform() {
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);
  }
  uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ftproxy
