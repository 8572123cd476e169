#pragma once

#include <cstdint>
#include <string>

namespace declarui {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit, hex-encoded. Used for code digests and config fingerprints.
std::string fnv1a_hex(const std::string& data);

}  // namespace declarui
