#pragma once

#include <filesystem>

#include "iagan/tensor.hpp"

namespace iagan {

/// Writes a {h, w} image with values in [0, 1] as binary 8-bit PGM (P5).
/// Values are clamped to [0, 1] and rounded to the nearest level.
void write_pgm(const std::filesystem::path& path, const Tensor& image);

/// Reads a binary (P5) or ASCII (P2) PGM with maxval <= 255 into a {h, w}
/// tensor scaled to [0, 1].
Tensor read_pgm(const std::filesystem::path& path);

/// Clamps every entry to [0, 1].
Tensor clamp_unit(Tensor image);

}  // namespace iagan
