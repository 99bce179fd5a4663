#include "binary_format.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

namespace rstc::detail {

std::span<const std::uint8_t> verify_checksum(std::span<const std::uint8_t> file,
                                              const std::string& what) {
  if (file.size() < 8) {
    throw FormatError(FormatErrorKind::kTruncated, what + ": too short for a checksum");
  }
  const auto body = file.first(file.size() - 8);
  ByteReader tail(file.last(8), what);
  if (tail.u64() != fnv1a(body)) {
    throw FormatError(FormatErrorKind::kChecksumMismatch, what + ": checksum mismatch");
  }
  return body;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError(FormatErrorKind::kIo, "read failed: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError(FormatErrorKind::kIo, "cannot rename onto " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

}  // namespace rstc::detail
