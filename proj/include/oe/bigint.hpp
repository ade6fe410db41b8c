#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace oe {

// Arbitrary-precision signed integer, sign-magnitude with base-1e9 limbs.
// Only the operations the symbolic engine needs: +, -, *, comparison,
// decimal I/O. Division is intentionally absent.
class BigInt {
public:
  BigInt() = default;
  BigInt(long long v);

  static BigInt fromString(std::string_view s); // throws std::invalid_argument

  std::string str() const;

  bool isZero() const { return mag_.empty(); }
  int signum() const { return sign_; }

  bool fitsInt64() const;
  int64_t toInt64() const; // precondition: fitsInt64()

  BigInt operator-() const;
  BigInt abs() const;

  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt operator-(const BigInt& a, const BigInt& b);
  friend BigInt operator*(const BigInt& a, const BigInt& b);

  BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
  BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
  BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

  // Three-way compare: -1, 0, +1.
  static int cmp(const BigInt& a, const BigInt& b);

  friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
  friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

private:
  static constexpr uint32_t kBase = 1000000000u;

  int sign_ = 0;               // -1, 0, +1
  std::vector<uint32_t> mag_;  // little-endian limbs, no leading zeros

  void trim();
  static std::vector<uint32_t> addMag(const std::vector<uint32_t>& a,
                                      const std::vector<uint32_t>& b);
  // precondition: a >= b
  static std::vector<uint32_t> subMag(const std::vector<uint32_t>& a,
                                      const std::vector<uint32_t>& b);
  static int cmpMag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
};

} // namespace oe
