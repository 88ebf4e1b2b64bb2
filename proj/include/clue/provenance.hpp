#pragma once

// Provenance stamps for emitted files: tool version, content hashes of the
// inputs, and the seed in effect. Deliberately no timestamps, so identical
// runs produce identical bytes.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace clue {

inline constexpr const char* tool_version = "clue 0.1.0";

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string content_hash(std::string_view data) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

// inputs: label -> raw file content (hashed here, never embedded)
inline nlohmann::ordered_json provenance_block(const std::map<std::string, std::string>& inputs,
                                               std::uint64_t seed) {
  nlohmann::ordered_json p;
  p["tool"] = tool_version;
  p["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [label, content] : inputs) p["inputs"][label] = content_hash(content);
  p["seed"] = seed;
  return p;
}

}  // namespace clue
