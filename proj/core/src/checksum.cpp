#include "attachsim/checksum.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "attachsim/errors.hpp"

namespace attachsim {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

std::string checksum_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace attachsim
