#include "rstc/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "binary_format.hpp"
#include "rstc/errors.hpp"

namespace rstc {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kHasLabels = 1u << 0;
constexpr std::uint32_t kHasViews = 1u << 1;
constexpr std::size_t kHeaderBytes = 20;

void write_block(detail::ByteWriter& w, const DenseMatrix& m) {
  for (double v : m.data()) w.f32(static_cast<float>(v));
}

DenseMatrix read_block(detail::ByteReader& r, std::size_t rows, std::size_t cols) {
  std::vector<double> data(rows * cols);
  for (double& v : data) v = static_cast<double>(r.f32());
  return DenseMatrix(rows, cols, std::move(data));
}

void require_shape(const DenseMatrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string("dataset: ") + what + " is " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                ", expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

}  // namespace

std::size_t EmbeddingDataset::label_classes() const noexcept {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

void EmbeddingDataset::validate() const {
  require_finite(embeddings, "dataset embeddings");
  if (labels && labels->size() != size()) {
    throw std::invalid_argument("dataset: " + std::to_string(labels->size()) + " labels for " +
                                std::to_string(size()) + " rows");
  }
  if (views) {
    require_shape(views->first, size(), dim(), "view1");
    require_shape(views->second, size(), dim(), "view2");
    require_finite(views->first, "dataset view1");
    require_finite(views->second, "dataset view2");
  }
}

std::vector<std::uint8_t> encode_emb1(const EmbeddingDataset& dataset) {
  dataset.validate();
  const auto limit = std::numeric_limits<std::uint32_t>::max();
  if (dataset.size() > limit || dataset.dim() > limit) {
    throw std::invalid_argument("save_emb1: dimensions exceed the u32 range");
  }
  if (dataset.labels) {
    for (std::size_t label : *dataset.labels) {
      if (label > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw std::invalid_argument("save_emb1: label exceeds the i32 range");
      }
    }
  }
  detail::ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(dataset.size()));
  w.u32(static_cast<std::uint32_t>(dataset.dim()));
  w.u32((dataset.labels ? kHasLabels : 0u) | (dataset.views ? kHasViews : 0u));
  write_block(w, dataset.embeddings);
  if (dataset.labels) {
    for (std::size_t label : *dataset.labels) w.i32(static_cast<std::int32_t>(label));
  }
  if (dataset.views) {
    write_block(w, dataset.views->first);
    write_block(w, dataset.views->second);
  }
  w.checksum();
  return w.buffer();
}

EmbeddingDataset decode_emb1(std::span<const std::uint8_t> bytes, const std::string& what) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, what + ": not an EMB1 file (bad magic)");
  }
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(FormatErrorKind::kTruncated, what + ": header truncated");
  }
  detail::ByteReader header(bytes.first(kHeaderBytes), what);
  header.take(4);
  const std::uint32_t version = header.u32();
  if (version != kVersion) {
    throw FormatError(FormatErrorKind::kUnsupportedVersion,
                      what + ": unsupported EMB1 version " + std::to_string(version));
  }
  const std::uint64_t n = header.u32();
  const std::uint64_t d = header.u32();
  const std::uint32_t flags = header.u32();
  if ((flags & ~(kHasLabels | kHasViews)) != 0) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": unknown flag bits");
  }
  const std::uint64_t block = n * d * 4;
  const std::uint64_t expected = kHeaderBytes + block + ((flags & kHasLabels) ? n * 4 : 0) +
                                 ((flags & kHasViews) ? 2 * block : 0) + 8;
  if (bytes.size() < expected) {
    throw FormatError(FormatErrorKind::kTruncated,
                      what + ": truncated (" + std::to_string(bytes.size()) + " of " +
                          std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": trailing bytes after checksum");
  }
  const auto body = detail::verify_checksum(bytes, what);

  detail::ByteReader r(body, what);
  r.take(kHeaderBytes);
  EmbeddingDataset out;
  out.embeddings = read_block(r, n, d);
  if (flags & kHasLabels) {
    std::vector<std::size_t> labels(n);
    for (auto& label : labels) {
      const std::int32_t v = r.i32();
      if (v < 0) throw FormatError(FormatErrorKind::kMalformed, what + ": negative label");
      label = static_cast<std::size_t>(v);
    }
    out.labels = std::move(labels);
  }
  if (flags & kHasViews) {
    ViewPair views;
    views.first = read_block(r, n, d);
    views.second = read_block(r, n, d);
    out.views = std::move(views);
  }
  for (const DenseMatrix* m : {&out.embeddings}) {
    if (!m->all_finite()) {
      throw FormatError(FormatErrorKind::kMalformed, what + ": non-finite embedding value");
    }
  }
  if (out.views && (!out.views->first.all_finite() || !out.views->second.all_finite())) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": non-finite view value");
  }
  return out;
}

void save_emb1(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_emb1(dataset));
}

EmbeddingDataset load_emb1(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  auto out = decode_emb1(bytes, path.string());
  out.name = path.stem().string();
  return out;
}

}  // namespace rstc
