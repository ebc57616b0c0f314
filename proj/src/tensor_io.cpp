#include "iagan/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace iagan {
namespace {

constexpr char kMagic[] = "IATF1\n";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
}

std::string read_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("IATF1: truncated header");
  return line;
}

}  // namespace

void write_iatf(std::ostream& out, const Tensor& t) {
  out.write(kMagic, sizeof(kMagic) - 1);
  out << t.rank() << '\n';
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (i) out << ' ';
    out << t.shape()[i];
  }
  out << '\n';
  for (double v : t.data()) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw std::runtime_error("IATF1: write failed");
}

Tensor read_iatf(std::istream& in) {
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw std::runtime_error("IATF1: bad magic");

  std::size_t rank = 0;
  {
    std::istringstream ls(read_line(in));
    if (!(ls >> rank) || rank == 0) throw std::runtime_error("IATF1: bad rank line");
  }
  Shape shape;
  {
    std::istringstream ls(read_line(in));
    std::size_t d;
    while (ls >> d) shape.push_back(d);
    if (shape.size() != rank) throw std::runtime_error("IATF1: dims do not match rank");
  }
  Tensor t(shape);
  for (double& v : t.data()) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw std::runtime_error("IATF1: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_iatf(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_iatf(in);
}

}  // namespace iagan
