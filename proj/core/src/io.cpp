#include "callgram/io.hpp"

#include "callgram/error.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace callgram {

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw Error{ErrorCode::IoError, "cannot open " + path.string()};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error{ErrorCode::IoError, "read failed: " + path.string()};
    }
    return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path &path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (!out) {
            throw Error{ErrorCode::IoError, "cannot write " + path.string()};
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error{ErrorCode::IoError, "write failed: " + path.string()};
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error{ErrorCode::IoError, "cannot rename into " + path.string()};
    }
}

}  // namespace callgram
