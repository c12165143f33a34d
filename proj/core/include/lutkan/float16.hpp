#pragma once

#include <cstdint>

namespace lutkan {

// IEEE-754 binary16 <-> binary32 conversion. Round to nearest, ties to even.
// Values above the f16 range become +/-inf; subnormals are preserved.
std::uint16_t f32_to_f16_bits(float f);
float f16_bits_to_f32(std::uint16_t h);

// Convenience: round a float through f16 precision.
inline float round_through_f16(float f) {
  return f16_bits_to_f32(f32_to_f16_bits(f));
}

}  // namespace lutkan
