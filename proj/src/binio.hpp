#ifndef SAL_SRC_BINIO_HPP
#define SAL_SRC_BINIO_HPP

// Little-endian binary file helpers shared by the model serializers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sal/errors.hpp"

namespace sal::binio {

static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_bytes(out, &v, sizeof(T));
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  if (!v.empty()) write_bytes(out, v.data(), v.size() * sizeof(T));
}

inline void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  require(in.good() || (in.eof() && in.gcount() == static_cast<std::streamsize>(n)),
          "truncated_file", "unexpected end of file");
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  read_bytes(in, &v, sizeof(T));
  return v;
}

template <typename T>
std::vector<T> read_vec(std::istream& in, std::size_t n) {
  std::vector<T> v(n);
  if (n > 0) read_bytes(in, v.data(), n * sizeof(T));
  return v;
}

// Files carry a 4-byte JSON header length followed by the header text and a
// raw little-endian payload.
inline void write_header(std::ostream& out, const nlohmann::json& header) {
  std::string text = header.dump();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  write_bytes(out, text.data(), text.size());
}

inline nlohmann::json read_header(std::istream& in, const std::string& expected_format) {
  auto len = read_pod<std::uint32_t>(in);
  require(len > 0 && len < (1u << 24), "bad_header", "implausible header length");
  std::string text(len, '\0');
  read_bytes(in, text.data(), len);
  nlohmann::json header = nlohmann::json::parse(text, nullptr, false);
  require(!header.is_discarded(), "bad_header", "header is not valid JSON");
  require(header.value("format", "") == expected_format, "bad_format",
          "expected format '" + expected_format + "'");
  return header;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "unwritable_file", "cannot open " + path + " for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "unreadable_file", "cannot open " + path);
  return in;
}

}  // namespace sal::binio

#endif
