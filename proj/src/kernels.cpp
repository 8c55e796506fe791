#include "songlm/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

namespace songlm::kernels {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

template <class T>
void gemm_nn_rows(std::size_t row_begin, std::size_t row_end, std::size_t n, std::size_t k, const T* a, const T* b,
                  T* c) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    T* ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = ai[p];
      if (aip == T(0)) continue;
      const T* bp = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

template <class T>
void gemm_tn_rows(std::size_t row_begin, std::size_t row_end, std::size_t m, std::size_t n, std::size_t k,
                  const T* a, const T* b, T* c) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    T* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T api = a[p * m + i];
      if (api == T(0)) continue;
      const T* bp = b + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

template <class T>
void gemm_nt_rows(std::size_t row_begin, std::size_t row_end, std::size_t n, std::size_t k, const T* a, const T* b,
                  T* c) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc = T(0);
#pragma omp simd reduction(+ : acc)
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

template <class T>
void gemm_tt_rows(std::size_t row_begin, std::size_t row_end, std::size_t m, std::size_t n, std::size_t k,
                  const T* a, const T* b, T* c) {
  for (std::size_t i = row_begin; i < row_end; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
      c[i * n + j] += acc;
    }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) { omp_set_num_threads(n > 0 ? n : 1); }

template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(T) * m * n);
  if (m == 0 || n == 0 || k == 0) return;
  const bool parallel = m * n * k >= kParallelWork && m > 1;
  const auto run = [&](std::size_t r0, std::size_t r1) {
    if (!trans_a && !trans_b) gemm_nn_rows(r0, r1, n, k, a, b, c);
    else if (trans_a && !trans_b) gemm_tn_rows(r0, r1, m, n, k, a, b, c);
    else if (!trans_a && trans_b) gemm_nt_rows(r0, r1, n, k, a, b, c);
    else gemm_tt_rows(r0, r1, m, n, k, a, b, c);
  };
  if (!parallel) {
    run(0, m);
    return;
  }
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) run(static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1);
}

template <class T>
void gemm_serial(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                 T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = trans_a ? a[p * m + i] : a[i * k + p];
        const double bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = static_cast<T>(accumulate ? c[i * n + j] + acc : acc);
    }
}

namespace {

template <class T>
void softmax_row(const T* x, T* y, std::size_t cols) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, static_cast<double>(x[j]));
  if (mx == -std::numeric_limits<double>::infinity()) {
    // Fully masked row: nothing to attend to.
    for (std::size_t j = 0; j < cols; ++j) y[j] = T(0);
    return;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    const double e = std::exp(static_cast<double>(x[j]) - mx);
    y[j] = static_cast<T>(e);
    sum += e;
  }
  const double inv = 1.0 / sum;
  for (std::size_t j = 0; j < cols; ++j) y[j] = static_cast<T>(static_cast<double>(y[j]) * inv);
}

template <class T>
void layer_norm_row(const T* x, const T* gamma, const T* beta, T* y, T* xhat, T* inv_std, std::size_t cols,
                    double eps) {
  double mean = 0.0;
  for (std::size_t j = 0; j < cols; ++j) mean += x[j];
  mean /= static_cast<double>(cols);
  double var = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    const double d = x[j] - mean;
    var += d * d;
  }
  var /= static_cast<double>(cols);
  const double is = 1.0 / std::sqrt(var + eps);
  *inv_std = static_cast<T>(is);
  for (std::size_t j = 0; j < cols; ++j) {
    const double h = (x[j] - mean) * is;
    xhat[j] = static_cast<T>(h);
    y[j] = static_cast<T>(h * gamma[j] + beta[j]);
  }
}

}  // namespace

template <class T>
void softmax_rows(const T* x, T* y, std::size_t rows, std::size_t cols) {
  const auto r = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < r; ++i)
    softmax_row(x + static_cast<std::size_t>(i) * cols, y + static_cast<std::size_t>(i) * cols, cols);
}

template <class T>
void softmax_rows_serial(const T* x, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) softmax_row(x + i * cols, y + i * cols, cols);
}

template <class T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* xhat, T* inv_std, std::size_t rows,
                     std::size_t cols, double eps) {
  const auto r = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < r; ++i) {
    const auto o = static_cast<std::size_t>(i) * cols;
    layer_norm_row(x + o, gamma, beta, y + o, xhat + o, inv_std + i, cols, eps);
  }
}

template <class T>
void layer_norm_rows_serial(const T* x, const T* gamma, const T* beta, T* y, T* xhat, T* inv_std, std::size_t rows,
                            std::size_t cols, double eps) {
  for (std::size_t i = 0; i < rows; ++i)
    layer_norm_row(x + i * cols, gamma, beta, y + i * cols, xhat + i * cols, inv_std + i, cols, eps);
}

#define SONGLM_INSTANTIATE(T)                                                                                    \
  template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool);         \
  template void gemm_serial<T>(bool, bool, std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool);  \
  template void softmax_rows<T>(const T*, T*, std::size_t, std::size_t);                                         \
  template void softmax_rows_serial<T>(const T*, T*, std::size_t, std::size_t);                                  \
  template void layer_norm_rows<T>(const T*, const T*, const T*, T*, T*, T*, std::size_t, std::size_t, double);   \
  template void layer_norm_rows_serial<T>(const T*, const T*, const T*, T*, T*, T*, std::size_t, std::size_t,     \
                                          double);

SONGLM_INSTANTIATE(float)
SONGLM_INSTANTIATE(double)
#undef SONGLM_INSTANTIATE

}  // namespace songlm::kernels
