#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "rstc/dataset.hpp"
#include "rstc/errors.hpp"

using namespace rstc;

namespace {

EmbeddingDataset sample_dataset(bool labels, bool views) {
  EmbeddingDataset d;
  d.embeddings = fixture::random_matrix(6, 3, 1);
  if (labels) d.labels = std::vector<std::size_t>{0, 1, 2, 0, 1, 2};
  if (views) d.views = ViewPair{fixture::random_matrix(6, 3, 2), fixture::random_matrix(6, 3, 3)};
  return d;
}

float as_f32(double v) { return static_cast<float>(v); }

FormatErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_emb1(bytes, "bytes");
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode succeeded";
  return FormatErrorKind::kIo;
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) bytes[at + k] = static_cast<std::uint8_t>(v >> (8 * k));
}

}  // namespace

TEST(Emb1, RoundTripAtFloat32Precision) {
  for (bool labels : {false, true}) {
    for (bool views : {false, true}) {
      const auto d = sample_dataset(labels, views);
      const auto back = decode_emb1(encode_emb1(d), "mem");
      ASSERT_EQ(back.size(), d.size());
      ASSERT_EQ(back.dim(), d.dim());
      for (std::size_t k = 0; k < d.embeddings.size(); ++k) {
        EXPECT_EQ(back.embeddings.data()[k], static_cast<double>(as_f32(d.embeddings.data()[k])));
      }
      EXPECT_EQ(back.labels, d.labels);
      EXPECT_EQ(back.views.has_value(), views);
      if (views) {
        EXPECT_EQ(back.views->second(5, 2), static_cast<double>(as_f32(d.views->second(5, 2))));
      }
    }
  }
}

TEST(Emb1, ResaveIsByteIdentical) {
  const auto dir = fixture::scratch_dir("emb1_resave");
  save_emb1(sample_dataset(true, true), dir / "a.emb");
  const auto loaded = load_emb1(dir / "a.emb");
  EXPECT_EQ(loaded.name, "a");
  save_emb1(loaded, dir / "b.emb");
  std::ifstream a(dir / "a.emb", std::ios::binary), b(dir / "b.emb", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST(Emb1, EmptyDatasetIsValid) {
  EmbeddingDataset d;
  d.embeddings = DenseMatrix(0, 5);
  const auto back = decode_emb1(encode_emb1(d), "mem");
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.dim(), 5u);
}

TEST(Emb1, HeaderLayout) {
  const auto bytes = encode_emb1(sample_dataset(true, false));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "EMB1");
  EXPECT_EQ(bytes[4], 1);   // version
  EXPECT_EQ(bytes[8], 6);   // N
  EXPECT_EQ(bytes[12], 3);  // D
  EXPECT_EQ(bytes[16], 1);  // flags: labels only
  // header + N*D f32 + N i32 + u64 checksum
  EXPECT_EQ(bytes.size(), 20u + 6 * 3 * 4 + 6 * 4 + 8);
}

TEST(Emb1, EverySingleByteCorruptionIsDetected) {
  const auto good = encode_emb1(sample_dataset(true, true));
  for (std::size_t at = 0; at < good.size(); ++at) {
    auto bad = good;
    bad[at] ^= 0x5a;
    EXPECT_THROW(decode_emb1(bad, "bytes"), FormatError) << "offset " << at;
  }
}

TEST(Emb1, PayloadCorruptionIsChecksumError) {
  auto bytes = encode_emb1(sample_dataset(false, false));
  bytes[30] ^= 0x01;
  EXPECT_EQ(decode_error(bytes), FormatErrorKind::kChecksumMismatch);
}

TEST(Emb1, DistinguishesFailureKinds) {
  const auto good = encode_emb1(sample_dataset(true, false));
  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), FormatErrorKind::kBadMagic);
  auto version = good;
  put_u32(version, 4, 2);
  EXPECT_EQ(decode_error(version), FormatErrorKind::kUnsupportedVersion);
  auto truncated = good;
  truncated.resize(good.size() - 9);
  EXPECT_EQ(decode_error(truncated), FormatErrorKind::kTruncated);
  EXPECT_EQ(decode_error(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)),
            FormatErrorKind::kTruncated);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error(trailing), FormatErrorKind::kMalformed);
  auto flags = good;
  put_u32(flags, 16, 8);
  EXPECT_EQ(decode_error(flags), FormatErrorKind::kMalformed);
}

TEST(Emb1, MissingFileIsIoError) {
  try {
    load_emb1("/nonexistent/dir/file.emb");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::kIo);
  }
}

TEST(Emb1, RejectsInconsistentDataset) {
  auto d = sample_dataset(true, false);
  d.labels->pop_back();
  EXPECT_THROW(encode_emb1(d), std::invalid_argument);
  auto v = sample_dataset(false, true);
  v.views->first = DenseMatrix(2, 3);
  EXPECT_THROW(encode_emb1(v), std::invalid_argument);
}
