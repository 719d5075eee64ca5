#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semchain {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes to a sibling temp file and renames it over `path`, so readers see
// either the old file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace semchain
