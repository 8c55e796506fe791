#pragma once

#include <cstddef>

// Dense CPU kernels behind the autograd ops. Each kernel has an OpenMP
// version used by the library and a plain serial reference kept for tests
// and the benchmark.
namespace songlm::kernels {

/// C(m x n) = op(A) * op(B), or C += ... when `accumulate` is set.
/// op(A) is m x k (A stored k x m when trans_a); op(B) is k x n (B stored
/// n x k when trans_b). All buffers row-major and contiguous.
template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

template <class T>
void gemm_serial(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                 T* c, bool accumulate);

/// Row-wise softmax; -inf entries map to exactly 0. Sums in double.
template <class T>
void softmax_rows(const T* x, T* y, std::size_t rows, std::size_t cols);

template <class T>
void softmax_rows_serial(const T* x, T* y, std::size_t rows, std::size_t cols);

/// Row-wise layer normalisation. Writes the normalised values (before the
/// affine map) into `xhat` and 1/sigma per row into `inv_std`.
template <class T>
void layer_norm_rows(const T* x, const T* gamma, const T* beta, T* y, T* xhat, T* inv_std, std::size_t rows,
                     std::size_t cols, double eps);

template <class T>
void layer_norm_rows_serial(const T* x, const T* gamma, const T* beta, T* y, T* xhat, T* inv_std, std::size_t rows,
                            std::size_t cols, double eps);

/// Number of threads the parallel kernels will use.
int max_threads();
void set_threads(int n);

}  // namespace songlm::kernels
