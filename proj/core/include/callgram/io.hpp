// io.hpp

#ifndef CALLGRAM_IO_HPP
#define CALLGRAM_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace callgram {

/// whole file as bytes; throws IoError
std::string read_file(const std::filesystem::path &path);

/// Writes to a sibling temporary file, then renames over `path`.
/// Throws IoError.
void write_file_atomic(const std::filesystem::path &path, std::string_view bytes);

}  // namespace callgram

#endif  // CALLGRAM_IO_HPP
