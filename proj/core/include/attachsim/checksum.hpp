#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace attachsim {

// 64-bit FNV-1a, used to fingerprint fixtures and output artifacts.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string checksum_hex(std::uint64_t h);

}  // namespace attachsim
