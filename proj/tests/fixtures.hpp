#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rstc/dense_matrix.hpp"
#include "rstc/numerics.hpp"
#include "rstc/rng.hpp"

namespace rstc::fixture {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 double scale = 1.0) {
  Rng rng(seed);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

// Rows drawn from a softmax of Gaussian logits.
inline DenseMatrix random_predictions(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                      double sharpness = 2.0) {
  return softmax_rows(random_matrix(rows, cols, seed, sharpness));
}

// Fresh scratch directory per test name, removed and recreated on each call.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rstc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rstc::fixture
