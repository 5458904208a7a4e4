#pragma once

// Little-endian POD helpers shared by the binary file formats.

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "sccount/errors.hpp"

namespace sccount {

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(std::string("truncated file reading ") + what);
  return v;
}

}  // namespace detail

}  // namespace sccount
