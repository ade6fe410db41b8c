#include "oe/bigint.hpp"

#include <cassert>
#include <stdexcept>

namespace oe {

BigInt::BigInt(long long v) {
  if (v == 0) return;
  sign_ = v < 0 ? -1 : 1;
  // avoid UB on LLONG_MIN
  unsigned long long u = v < 0 ? ~static_cast<unsigned long long>(v) + 1ull
                               : static_cast<unsigned long long>(v);
  while (u != 0) {
    mag_.push_back(static_cast<uint32_t>(u % kBase));
    u /= kBase;
  }
}

BigInt BigInt::fromString(std::string_view s) {
  size_t i = 0;
  int sign = 1;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    sign = s[i] == '-' ? -1 : 1;
    ++i;
  }
  if (i >= s.size()) throw std::invalid_argument("BigInt: empty numeral");
  BigInt r;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
    r = r * BigInt(10) + BigInt(s[i] - '0');
  }
  if (sign < 0) r = -r;
  return r;
}

std::string BigInt::str() const {
  if (isZero()) return "0";
  std::string out = sign_ < 0 ? "-" : "";
  out += std::to_string(mag_.back());
  for (size_t i = mag_.size() - 1; i-- > 0;) {
    std::string limb = std::to_string(mag_[i]);
    out += std::string(9 - limb.size(), '0') + limb;
  }
  return out;
}

bool BigInt::fitsInt64() const {
  // 3 limbs cover up to ~1e27; compare against int64 bounds directly.
  if (mag_.size() > 3) return false;
  unsigned long long v = 0;
  for (size_t i = mag_.size(); i-- > 0;) {
    if (v > (~0ull) / kBase) return false;
    v = v * kBase + mag_[i];
  }
  if (sign_ >= 0) return v <= 9223372036854775807ull;
  return v <= 9223372036854775808ull;
}

int64_t BigInt::toInt64() const {
  assert(fitsInt64());
  unsigned long long v = 0;
  for (size_t i = mag_.size(); i-- > 0;) v = v * kBase + mag_[i];
  if (sign_ < 0) return static_cast<int64_t>(~v + 1ull);
  return static_cast<int64_t>(v);
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  r.sign_ = -r.sign_;
  return r;
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  if (r.sign_ < 0) r.sign_ = 1;
  return r;
}

void BigInt::trim() {
  while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
  if (mag_.empty()) sign_ = 0;
}

std::vector<uint32_t> BigInt::addMag(const std::vector<uint32_t>& a,
                                     const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r(std::max(a.size(), b.size()) + 1, 0);
  uint64_t carry = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    uint64_t s = carry;
    if (i < a.size()) s += a[i];
    if (i < b.size()) s += b[i];
    r[i] = static_cast<uint32_t>(s % kBase);
    carry = s / kBase;
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

std::vector<uint32_t> BigInt::subMag(const std::vector<uint32_t>& a,
                                     const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r = a;
  int64_t borrow = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    int64_t s = static_cast<int64_t>(r[i]) - borrow - (i < b.size() ? b[i] : 0);
    if (s < 0) {
      s += kBase;
      borrow = 1;
    } else {
      borrow = 0;
    }
    r[i] = static_cast<uint32_t>(s);
  }
  assert(borrow == 0);
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

int BigInt::cmpMag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  return 0;
}

int BigInt::cmp(const BigInt& a, const BigInt& b) {
  if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
  int m = cmpMag(a.mag_, b.mag_);
  return a.sign_ >= 0 ? m : -m;
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  if (a.isZero()) return b;
  if (b.isZero()) return a;
  BigInt r;
  if (a.sign_ == b.sign_) {
    r.sign_ = a.sign_;
    r.mag_ = BigInt::addMag(a.mag_, b.mag_);
  } else {
    int m = BigInt::cmpMag(a.mag_, b.mag_);
    if (m == 0) return BigInt();
    if (m > 0) {
      r.sign_ = a.sign_;
      r.mag_ = BigInt::subMag(a.mag_, b.mag_);
    } else {
      r.sign_ = b.sign_;
      r.mag_ = BigInt::subMag(b.mag_, a.mag_);
    }
  }
  r.trim();
  return r;
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

BigInt operator*(const BigInt& a, const BigInt& b) {
  if (a.isZero() || b.isZero()) return BigInt();
  BigInt r;
  r.sign_ = a.sign_ * b.sign_;
  std::vector<unsigned __int128> acc(a.mag_.size() + b.mag_.size(), 0);
  for (size_t i = 0; i < a.mag_.size(); ++i)
    for (size_t j = 0; j < b.mag_.size(); ++j)
      acc[i + j] += static_cast<uint64_t>(a.mag_[i]) * b.mag_[j];
  r.mag_.assign(acc.size(), 0);
  unsigned __int128 carry = 0;
  for (size_t i = 0; i < acc.size(); ++i) {
    unsigned __int128 s = acc[i] + carry;
    r.mag_[i] = static_cast<uint32_t>(s % BigInt::kBase);
    carry = s / BigInt::kBase;
  }
  while (carry != 0) {
    r.mag_.push_back(static_cast<uint32_t>(carry % BigInt::kBase));
    carry /= BigInt::kBase;
  }
  r.trim();
  return r;
}

} // namespace oe
