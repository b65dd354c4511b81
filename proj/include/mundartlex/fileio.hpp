#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>

#include <unistd.h>

#include "mundartlex/error.hpp"

namespace mundartlex {

/// Writes `contents` to a sibling temp file, fsyncs it and renames it over
/// `path`, so readers never observe a partially written file.
inline void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    const bool ok = std::fwrite(contents.data(), 1, contents.size(), f) == contents.size() && std::fflush(f) == 0 &&
                    ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) {
        std::remove(tmp.c_str());
        throw IoError("write failure on " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
    }
}

}  // namespace mundartlex
