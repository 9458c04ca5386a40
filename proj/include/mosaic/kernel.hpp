// Copyright 2026 The Mosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mosaic/common.hpp"

namespace mosaic::kernel {

/// Row-major dense matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const T* row(std::size_t r) const { return data.data() + r * cols; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct Tiles {
  std::size_t t_m = 32;
  std::size_t t_d = 64;
  std::size_t t_v = 64;
};

struct ScratchAccount {
  std::size_t peak_elements = 0;
  std::size_t current = 0;

  void acquire(std::size_t n);
  void release(std::size_t n);
  /// t_m*t_d + t_d*t_v + t_m*t_v
  static std::size_t bound(const Tiles& tiles);
};

template <typename T>
struct GatherGemmProblem {
  const Matrix<T>* H = nullptr;  // [n_tokens x d]
  const Matrix<T>* W = nullptr;  // [d x V]
  std::vector<std::int64_t> mask_idx;
  Tiles tiles;
  std::size_t threads = 1;
};

template <typename T>
struct GatherGemmResult {
  Matrix<T> logits;  // [m x V]
  ScratchAccount scratch;
};

/// logits[i, :] = H[mask_idx[i], :] * W, tile by tile, reading H rows through
/// the index list. Accumulation runs over ascending k, so results do not
/// depend on the tile sizes. Throws InputError on duplicate or out-of-range
/// indices, mismatched dimensions or zero tiles.
template <typename T>
GatherGemmResult<T> gather_gemm(const GatherGemmProblem<T>& p);

/// Naive triple loop. Throws InputError on mismatched dimensions.
template <typename T>
Matrix<T> gemm_reference(const Matrix<T>& a, const Matrix<T>& b);

/// Copies the indexed rows of H (test and benchmark helper).
template <typename T>
Matrix<T> gather_rows(const Matrix<T>& h, const std::vector<std::int64_t>& idx);

extern template GatherGemmResult<double> gather_gemm(const GatherGemmProblem<double>&);
extern template GatherGemmResult<float> gather_gemm(const GatherGemmProblem<float>&);
extern template Matrix<double> gemm_reference(const Matrix<double>&, const Matrix<double>&);
extern template Matrix<float> gemm_reference(const Matrix<float>&, const Matrix<float>&);
extern template Matrix<double> gather_rows(const Matrix<double>&, const std::vector<std::int64_t>&);
extern template Matrix<float> gather_rows(const Matrix<float>&, const std::vector<std::int64_t>&);

}  // namespace mosaic::kernel
