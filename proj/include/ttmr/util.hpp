#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmr {

// Error taxonomy used for CLI exit codes.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t v);

// FNV-1a digest of a file's bytes, as 16 hex chars. Throws DataError if unreadable.
std::string file_digest(const std::string& path);

std::vector<std::string> split_ws(const std::string& s);
std::string lowercase(const std::string& s);
std::string trim(const std::string& s);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ttmr
