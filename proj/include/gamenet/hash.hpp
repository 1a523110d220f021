#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace gamenet {

// 64-bit FNV-1a. Used for WL labels and content keys; stable across runs
// and platforms.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) {
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t v);

// SHA-256 hex digests, for artifact manifests.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gamenet
