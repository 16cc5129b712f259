#ifndef CCGEO_IO_HPP
#define CCGEO_IO_HPP

#include <string>

namespace ccgeo {

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string fmt17(double x);

/// Write `content` to `path` atomically (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace ccgeo

#endif
