#pragma once

#include <filesystem>
#include <iosfwd>

#include "iagan/tensor.hpp"

namespace iagan {

// IATF1 layout: "IATF1\n", the rank in ASCII followed by '\n', the dims in
// ASCII separated by single spaces followed by '\n', then the payload as
// raw little-endian IEEE-754 float64 values in row-major order.

void write_iatf(std::ostream& out, const Tensor& t);
Tensor read_iatf(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace iagan
