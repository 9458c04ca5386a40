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

#include "mosaic/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <string>
#include <thread>

namespace mosaic::kernel {

void ScratchAccount::acquire(std::size_t n) {
  current += n;
  peak_elements = std::max(peak_elements, current);
}

void ScratchAccount::release(std::size_t n) { current -= std::min(n, current); }

std::size_t ScratchAccount::bound(const Tiles& t) {
  return t.t_m * t.t_d + t.t_d * t.t_v + t.t_m * t.t_v;
}

namespace {

void check_indices(const std::vector<std::int64_t>& idx, std::size_t n_tokens) {
  std::vector<bool> seen(n_tokens, false);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = idx[i];
    if (r < 0 || static_cast<std::size_t>(r) >= n_tokens) {
      throw InputError("mask index " + std::to_string(r) + " at position " + std::to_string(i) +
                       " is outside [0, " + std::to_string(n_tokens) + ")");
    }
    if (seen[static_cast<std::size_t>(r)]) {
      throw InputError("duplicate mask index " + std::to_string(r));
    }
    seen[static_cast<std::size_t>(r)] = true;
  }
}

// One [t_m x t_v] output tile. The three panels are the only scratch.
template <typename T>
void output_tile(const GatherGemmProblem<T>& p, std::size_t i0, std::size_t j0, Matrix<T>& out,
                 ScratchAccount& scratch) {
  const auto& H = *p.H;
  const auto& W = *p.W;
  const auto& t = p.tiles;
  const std::size_t m = p.mask_idx.size();
  const std::size_t d = H.cols;
  const std::size_t V = W.cols;
  const std::size_t mi = std::min(t.t_m, m - i0);
  const std::size_t vj = std::min(t.t_v, V - j0);

  std::vector<T> acc(mi * vj, T{});
  scratch.acquire(t.t_m * t.t_v);
  std::vector<T> a_panel(t.t_m * t.t_d);
  std::vector<T> b_panel(t.t_d * t.t_v);
  scratch.acquire(t.t_m * t.t_d + t.t_d * t.t_v);

  for (std::size_t k0 = 0; k0 < d; k0 += t.t_d) {
    const std::size_t dk = std::min(t.t_d, d - k0);
    for (std::size_t i = 0; i < mi; ++i) {
      const T* src = H.row(static_cast<std::size_t>(p.mask_idx[i0 + i])) + k0;
      std::copy(src, src + dk, a_panel.begin() + static_cast<std::ptrdiff_t>(i * t.t_d));
    }
    for (std::size_t k = 0; k < dk; ++k) {
      const T* src = W.row(k0 + k) + j0;
      std::copy(src, src + vj, b_panel.begin() + static_cast<std::ptrdiff_t>(k * t.t_v));
    }
    for (std::size_t i = 0; i < mi; ++i) {
      for (std::size_t j = 0; j < vj; ++j) {
        T s = acc[i * vj + j];
        for (std::size_t k = 0; k < dk; ++k) s += a_panel[i * t.t_d + k] * b_panel[k * t.t_v + j];
        acc[i * vj + j] = s;
      }
    }
  }
  for (std::size_t i = 0; i < mi; ++i) {
    std::copy(acc.begin() + static_cast<std::ptrdiff_t>(i * vj),
              acc.begin() + static_cast<std::ptrdiff_t>((i + 1) * vj), &out(i0 + i, j0));
  }
  scratch.release(t.t_m * t.t_d + t.t_d * t.t_v + t.t_m * t.t_v);
}

}  // namespace

template <typename T>
GatherGemmResult<T> gather_gemm(const GatherGemmProblem<T>& p) {
  if (!p.H || !p.W) throw InputError("gather_gemm needs both H and W");
  if (p.H->cols != p.W->rows) {
    throw InputError("H has " + std::to_string(p.H->cols) + " columns but W has " +
                     std::to_string(p.W->rows) + " rows");
  }
  if (p.tiles.t_m == 0 || p.tiles.t_d == 0 || p.tiles.t_v == 0) throw InputError("tile sizes must be >= 1");
  check_indices(p.mask_idx, p.H->rows);

  GatherGemmResult<T> result;
  const std::size_t m = p.mask_idx.size();
  const std::size_t V = p.W->cols;
  result.logits = Matrix<T>(m, V);
  if (m == 0 || V == 0) return result;

  std::vector<std::pair<std::size_t, std::size_t>> tiles;
  for (std::size_t i0 = 0; i0 < m; i0 += p.tiles.t_m) {
    for (std::size_t j0 = 0; j0 < V; j0 += p.tiles.t_v) tiles.emplace_back(i0, j0);
  }
  const std::size_t workers = std::clamp<std::size_t>(p.threads, 1, tiles.size());
  if (workers == 1) {
    for (const auto& [i0, j0] : tiles) output_tile(p, i0, j0, result.logits, result.scratch);
    return result;
  }
  // Each output tile is written by exactly one worker; scratch is per worker.
  std::atomic<std::size_t> next{0};
  std::vector<ScratchAccount> accounts(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = next++; i < tiles.size(); i = next++) {
        output_tile(p, tiles[i].first, tiles[i].second, result.logits, accounts[w]);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& a : accounts) {
    result.scratch.peak_elements = std::max(result.scratch.peak_elements, a.peak_elements);
  }
  return result;
}

template <typename T>
Matrix<T> gemm_reference(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols != b.rows) {
    throw InputError("cannot multiply " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " by " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  Matrix<T> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      T s{};
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& h, const std::vector<std::int64_t>& idx) {
  check_indices(idx, h.rows);
  Matrix<T> out(idx.size(), h.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy(h.row(static_cast<std::size_t>(idx[i])), h.row(static_cast<std::size_t>(idx[i])) + h.cols,
              &out(i, 0));
  }
  return out;
}

template GatherGemmResult<double> gather_gemm(const GatherGemmProblem<double>&);
template GatherGemmResult<float> gather_gemm(const GatherGemmProblem<float>&);
template Matrix<double> gemm_reference(const Matrix<double>&, const Matrix<double>&);
template Matrix<float> gemm_reference(const Matrix<float>&, const Matrix<float>&);
template Matrix<double> gather_rows(const Matrix<double>&, const std::vector<std::int64_t>&);
template Matrix<float> gather_rows(const Matrix<float>&, const std::vector<std::int64_t>&);

}  // namespace mosaic::kernel
