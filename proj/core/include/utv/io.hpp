#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace utv {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string to_hex(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
std::uint64_t hash_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the destination.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace utv
