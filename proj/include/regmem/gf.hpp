#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "regmem/errors.hpp"

namespace regmem::gf {

// GF(2^m) for m in {4, 8}, log/antilog tables over a primitive polynomial.
// alpha = 2 is primitive for both moduli used here.
class Field {
 public:
  explicit Field(int m) : m_(m) {
    uint32_t poly;
    switch (m) {
      case 4:
        poly = 0x13;  // x^4 + x + 1
        break;
      case 8:
        poly = 0x11d;  // x^8 + x^4 + x^3 + x^2 + 1
        break;
      default:
        throw InvalidParams("field degree must be 4 or 8");
    }
    size_ = 1u << m;
    exp_.assign(2 * (size_ - 1), 0);
    log_.assign(size_, 0);
    uint32_t x = 1;
    for (uint32_t i = 0; i < size_ - 1; ++i) {
      exp_[i] = static_cast<uint8_t>(x);
      log_[x] = i;
      x <<= 1;
      if (x & size_) x ^= poly;
    }
    for (uint32_t i = size_ - 1; i < 2 * (size_ - 1); ++i) exp_[i] = exp_[i - (size_ - 1)];
  }

  int degree() const { return m_; }
  uint32_t size() const { return size_; }

  uint8_t add(uint8_t a, uint8_t b) const { return a ^ b; }
  uint8_t sub(uint8_t a, uint8_t b) const { return a ^ b; }

  uint8_t mul(uint8_t a, uint8_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  uint8_t div(uint8_t a, uint8_t b) const {
    if (b == 0) throw SingularSystem("division by zero field element");
    if (a == 0) return 0;
    return exp_[log_[a] + (size_ - 1) - log_[b]];
  }

  uint8_t inv(uint8_t a) const { return div(1, a); }

  uint8_t pow(uint8_t a, uint32_t e) const {
    if (e == 0) return 1;
    if (a == 0) return 0;
    return exp_[(static_cast<uint64_t>(log_[a]) * e) % (size_ - 1)];
  }

  // i-th nonzero element in generator order, 1-based: alpha_1 = 1, alpha_2 = g, ...
  uint8_t eval_point(int i) const {
    if (i < 1 || static_cast<uint32_t>(i) > size_ - 1)
      throw InvalidParams("evaluation point index out of field range");
    return exp_[i - 1];
  }

 private:
  int m_;
  uint32_t size_;
  std::vector<uint8_t> exp_;
  std::vector<uint32_t> log_;
};

inline const Field& field16() {
  static const Field f(4);
  return f;
}

inline const Field& field256() {
  static const Field f(8);
  return f;
}

}  // namespace regmem::gf
