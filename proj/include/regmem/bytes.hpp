#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regmem/errors.hpp"

namespace regmem {

// Canonical byte strings. All state, message and fingerprint encodings go
// through ByteWriter/ByteReader so that equal logical content always yields
// identical bytes: fixed-width big-endian integers, u32 length prefixes,
// fields in declaration order.
using Bytes = std::string;

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(static_cast<char>(v)); }

  void u32(uint32_t v) {
    out_.push_back(static_cast<char>((v >> 24) & 0xff));
    out_.push_back(static_cast<char>((v >> 16) & 0xff));
    out_.push_back(static_cast<char>((v >> 8) & 0xff));
    out_.push_back(static_cast<char>(v & 0xff));
  }

  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v >> 32));
    u32(static_cast<uint32_t>(v & 0xffffffffull));
  }

  void bytes(const Bytes& b) {
    u32(static_cast<uint32_t>(b.size()));
    out_.append(b);
  }

  void raw(const Bytes& b) { out_.append(b); }

  const Bytes& str() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& b) : data_(b) {}

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(data_[pos_++]);
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<uint8_t>(data_[pos_++]);
    return v;
  }

  uint64_t u64() {
    uint64_t hi = u32();
    return (hi << 32) | u32();
  }

  Bytes bytes() {
    uint32_t n = u32();
    need(n);
    Bytes b = data_.substr(pos_, n);
    pos_ += n;
    return b;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > data_.size()) throw Error("byte decode past end");
  }

  const Bytes& data_;
  size_t pos_ = 0;
};

inline uint64_t fnv1a64(const Bytes& b) {
  uint64_t h = 1469598103934665603ull;
  for (char c : b) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (char c : b) {
    auto u = static_cast<uint8_t>(c);
    s.push_back(digits[u >> 4]);
    s.push_back(digits[u & 0xf]);
  }
  return s;
}

// Short stable digest used in trace exports and drop logs.
inline std::string digest_hex(const Bytes& b) {
  uint64_t h = fnv1a64(b);
  Bytes raw;
  for (int i = 7; i >= 0; --i) raw.push_back(static_cast<char>((h >> (8 * i)) & 0xff));
  return to_hex(raw);
}

inline std::string base64(const Bytes& b) {
  static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string s;
  size_t i = 0;
  while (i + 2 < b.size()) {
    uint32_t v = (static_cast<uint8_t>(b[i]) << 16) | (static_cast<uint8_t>(b[i + 1]) << 8) |
                 static_cast<uint8_t>(b[i + 2]);
    s.push_back(tbl[(v >> 18) & 63]);
    s.push_back(tbl[(v >> 12) & 63]);
    s.push_back(tbl[(v >> 6) & 63]);
    s.push_back(tbl[v & 63]);
    i += 3;
  }
  if (i + 1 == b.size()) {
    uint32_t v = static_cast<uint8_t>(b[i]) << 16;
    s.push_back(tbl[(v >> 18) & 63]);
    s.push_back(tbl[(v >> 12) & 63]);
    s += "==";
  } else if (i + 2 == b.size()) {
    uint32_t v = (static_cast<uint8_t>(b[i]) << 16) | (static_cast<uint8_t>(b[i + 1]) << 8);
    s.push_back(tbl[(v >> 18) & 63]);
    s.push_back(tbl[(v >> 12) & 63]);
    s.push_back(tbl[(v >> 6) & 63]);
    s += "=";
  }
  return s;
}

}  // namespace regmem
