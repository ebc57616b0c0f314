#include "iagan/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "iagan/errors.hpp"

namespace iagan {
namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw std::runtime_error("PGM: truncated header");
  return tok;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 2) throw ShapeError("write_pgm: image must have shape {h, w}");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.dim(1) << ' ' << image.dim(0) << "\n255\n";
  for (double v : image.data()) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Tensor read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw std::runtime_error("PGM: unsupported magic " + magic);
  const std::size_t w = std::stoul(next_token(in));
  const std::size_t h = std::stoul(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("PGM: only 8-bit images are supported");

  Tensor img({h, w});
  for (double& v : img.data()) {
    int level;
    if (magic == "P5") {
      char c;
      if (!in.get(c)) throw std::runtime_error("PGM: truncated pixel data");
      level = static_cast<unsigned char>(c);
    } else {
      level = std::stoi(next_token(in));
    }
    v = static_cast<double>(level) / maxval;
  }
  return img;
}

Tensor clamp_unit(Tensor image) {
  for (double& v : image.data()) v = std::clamp(v, 0.0, 1.0);
  return image;
}

}  // namespace iagan
