#include "lutkan/float16.hpp"

#include <cstring>

namespace lutkan {

std::uint16_t f32_to_f16_bits(float f) {
  std::uint32_t x;
  std::memcpy(&x, &f, 4);

  const std::uint32_t sign = (x >> 16) & 0x8000u;
  std::uint32_t exp = (x >> 23) & 0xffu;
  std::uint32_t mant = x & 0x7fffffu;

  if (exp == 0xffu) {  // inf or NaN
    std::uint32_t m = mant ? 0x200u | (mant >> 13) : 0;
    return static_cast<std::uint16_t>(sign | 0x7c00u | m);
  }

  // Re-bias 127 -> 15.
  int e = static_cast<int>(exp) - 127 + 15;
  if (e >= 0x1f) return static_cast<std::uint16_t>(sign | 0x7c00u);  // overflow -> inf

  if (e <= 0) {
    // Subnormal half (or zero). Shift the implicit leading 1 into the mantissa.
    if (e < -10) return static_cast<std::uint16_t>(sign);  // underflow to zero
    mant |= 0x800000u;
    const int shift = 14 - e;  // 14..24
    std::uint32_t half_mant = mant >> shift;
    // Round to nearest even on the dropped bits.
    const std::uint32_t rem = mant & ((1u << shift) - 1);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half_mant & 1u))) half_mant++;
    return static_cast<std::uint16_t>(sign | half_mant);
  }

  // Normal half. Keep 10 mantissa bits, round to nearest even on the rest.
  std::uint32_t half = sign | (static_cast<std::uint32_t>(e) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) half++;  // may carry into exp -> inf, which is correct
  return static_cast<std::uint16_t>(half);
}

float f16_bits_to_f32(std::uint16_t h) {
  const std::uint32_t sign = (static_cast<std::uint32_t>(h) & 0x8000u) << 16;
  std::uint32_t exp = (h >> 10) & 0x1fu;
  std::uint32_t mant = h & 0x3ffu;
  std::uint32_t out;

  if (exp == 0x1fu) {  // inf or NaN
    out = sign | 0x7f800000u | (mant << 13);
  } else if (exp == 0) {
    if (mant == 0) {
      out = sign;
    } else {
      // Normalize the subnormal.
      int e = -1;
      do {
        mant <<= 1;
        e++;
      } while ((mant & 0x400u) == 0);
      out = sign | (static_cast<std::uint32_t>(127 - 15 - e) << 23) | ((mant & 0x3ffu) << 13);
    }
  } else {
    out = sign | ((exp - 15 + 127) << 23) | (mant << 13);
  }

  float f;
  std::memcpy(&f, &out, 4);
  return f;
}

}  // namespace lutkan
