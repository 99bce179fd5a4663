#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rstc/augment.hpp"
#include "rstc/dense_matrix.hpp"

namespace rstc {

/// Frozen embeddings plus optional ground truth and stored augmented views.
struct EmbeddingDataset {
  DenseMatrix embeddings;  // N x D
  std::optional<std::vector<std::size_t>> labels;
  /// Both views or neither; each N x D.
  std::optional<ViewPair> views;
  std::string name;

  std::size_t size() const noexcept { return embeddings.rows(); }
  std::size_t dim() const noexcept { return embeddings.cols(); }
  /// max label + 1, or 0 without labels.
  std::size_t label_classes() const noexcept;

  /// Throws std::invalid_argument if optional parts disagree with N x D or
  /// anything is non-finite.
  void validate() const;
};

/// EMB1, all integers and floats little-endian:
///   "EMB1" | u32 version = 1 | u32 N | u32 D | u32 flags
///   N*D f32 embeddings, row-major
///   [flags bit0] N i32 labels
///   [flags bit1] N*D f32 view1, then N*D f32 view2
///   u64 FNV-1a of every preceding byte
/// Values are stored as float32 and widened on load, so a save/load/save
/// cycle is byte-identical. Written atomically through a temp file.
void save_emb1(const EmbeddingDataset& dataset, const std::filesystem::path& path);
/// Throws FormatError whose kind distinguishes I/O failure, bad magic,
/// unsupported version, truncation, checksum mismatch and malformed content.
EmbeddingDataset load_emb1(const std::filesystem::path& path);

/// Serialized EMB1 bytes, as save_emb1 would write them.
std::vector<std::uint8_t> encode_emb1(const EmbeddingDataset& dataset);
EmbeddingDataset decode_emb1(std::span<const std::uint8_t> bytes, const std::string& what);

}  // namespace rstc
