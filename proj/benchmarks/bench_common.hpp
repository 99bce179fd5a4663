#pragma once

#include <cstdint>

#include "rstc/dense_matrix.hpp"
#include "rstc/numerics.hpp"
#include "rstc/rng.hpp"

namespace bench {

inline rstc::DenseMatrix normal_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                       double scale = 1.0) {
  rstc::Rng rng(seed);
  rstc::DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

inline rstc::DenseMatrix predictions(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return rstc::softmax_rows(normal_matrix(rows, cols, seed, 2.0));
}

}  // namespace bench
