#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ooda {

/// SHA-256 of a byte string, lowercase hex. Used for manifest content hashes.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents. Throws IoError if the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace ooda
