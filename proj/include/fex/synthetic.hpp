#pragma once

#include <cstdint>

#include "fex/imaging.hpp"

namespace fex {

/// Procedural primate-face texture: orange fur, a red nose ridge flanked by
/// striped blue cheeks, dark eyes and a pale beard. Pure integer/double
/// arithmetic without libm, so the bytes are reproducible across platforms.
ColorImage synthetic_mandrill(int width = 256, int height = 256, std::uint64_t seed = 0x6d616e6472696c6cULL);

/// Two flat regions: left half `dark`, right half `bright`.
GrayImage two_tone(int width, int height, std::uint8_t dark = 50, std::uint8_t bright = 200);

}  // namespace fex
