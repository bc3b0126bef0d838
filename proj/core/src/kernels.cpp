#include "kernels.hpp"

#include <algorithm>

namespace semdrive::detail {

namespace {
constexpr int kRows = 4;
constexpr int kCols = 8;
constexpr int kLanes = 4;
}  // namespace

void gemm_acc(int M, int N, int K, const float* A, const double* B, double* C) {
  for (int m0 = 0; m0 < M; m0 += kRows) {
    const int mb = std::min(kRows, M - m0);
    for (int n0 = 0; n0 < N; n0 += kCols) {
      const int nb = std::min(kCols, N - n0);
      if (mb == kRows && nb == kCols) {
        double acc[kRows][kCols] = {};
        for (int k = 0; k < K; ++k) {
          const double* b = B + static_cast<long>(k) * N + n0;
          for (int i = 0; i < kRows; ++i) {
            const double a = A[static_cast<long>(m0 + i) * K + k];
            for (int j = 0; j < kCols; ++j) acc[i][j] += a * b[j];
          }
        }
        for (int i = 0; i < kRows; ++i) {
          double* c = C + static_cast<long>(m0 + i) * N + n0;
          for (int j = 0; j < kCols; ++j) c[j] += acc[i][j];
        }
      } else {
        for (int i = 0; i < mb; ++i) {
          for (int j = 0; j < nb; ++j) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
              acc += A[static_cast<long>(m0 + i) * K + k] * B[static_cast<long>(k) * N + n0 + j];
            }
            C[static_cast<long>(m0 + i) * N + n0 + j] += acc;
          }
        }
      }
    }
  }
}

void gemm_abt_acc(int M, int K, int N, const double* A, const double* B, double* C) {
  constexpr int kKb = 2;
  const int n_vec = N - N % kLanes;
  for (int m0 = 0; m0 < M; m0 += kRows) {
    const int mb = std::min(kRows, M - m0);
    for (int k0 = 0; k0 < K; k0 += kKb) {
      const int kb = std::min(kKb, K - k0);
      if (mb == kRows && kb == kKb) {
        double acc[kRows][kKb][kLanes] = {};
        for (int n = 0; n < n_vec; n += kLanes) {
          for (int i = 0; i < kRows; ++i) {
            const double* a = A + static_cast<long>(m0 + i) * N + n;
            for (int j = 0; j < kKb; ++j) {
              const double* b = B + static_cast<long>(k0 + j) * N + n;
              for (int l = 0; l < kLanes; ++l) acc[i][j][l] += a[l] * b[l];
            }
          }
        }
        for (int i = 0; i < kRows; ++i) {
          for (int j = 0; j < kKb; ++j) {
            double sum = (acc[i][j][0] + acc[i][j][1]) + (acc[i][j][2] + acc[i][j][3]);
            for (int n = n_vec; n < N; ++n) {
              sum += A[static_cast<long>(m0 + i) * N + n] * B[static_cast<long>(k0 + j) * N + n];
            }
            C[static_cast<long>(m0 + i) * K + k0 + j] += sum;
          }
        }
      } else {
        for (int i = 0; i < mb; ++i) {
          for (int j = 0; j < kb; ++j) {
            double sum = 0.0;
            for (int n = 0; n < N; ++n) {
              sum += A[static_cast<long>(m0 + i) * N + n] * B[static_cast<long>(k0 + j) * N + n];
            }
            C[static_cast<long>(m0 + i) * K + k0 + j] += sum;
          }
        }
      }
    }
  }
}

void gemm_atb_acc(int M, int K, int N, const float* A, const double* B, double* C) {
  for (int k0 = 0; k0 < K; k0 += kRows) {
    const int kb = std::min(kRows, K - k0);
    for (int n0 = 0; n0 < N; n0 += kCols) {
      const int nb = std::min(kCols, N - n0);
      if (kb == kRows && nb == kCols) {
        double acc[kRows][kCols] = {};
        for (int m = 0; m < M; ++m) {
          const double* b = B + static_cast<long>(m) * N + n0;
          for (int i = 0; i < kRows; ++i) {
            const double a = A[static_cast<long>(m) * K + k0 + i];
            for (int j = 0; j < kCols; ++j) acc[i][j] += a * b[j];
          }
        }
        for (int i = 0; i < kRows; ++i) {
          double* c = C + static_cast<long>(k0 + i) * N + n0;
          for (int j = 0; j < kCols; ++j) c[j] += acc[i][j];
        }
      } else {
        for (int i = 0; i < kb; ++i) {
          for (int j = 0; j < nb; ++j) {
            double acc = 0.0;
            for (int m = 0; m < M; ++m) {
              acc += A[static_cast<long>(m) * K + k0 + i] * B[static_cast<long>(m) * N + n0 + j];
            }
            C[static_cast<long>(k0 + i) * N + n0 + j] += acc;
          }
        }
      }
    }
  }
}

void gemv_acc(int M, int K, const float* A, const double* x, double* y) {
  const int k_vec = K - K % kLanes;
  int m = 0;
  for (; m + kRows <= M; m += kRows) {
    double acc[kRows][kLanes] = {};
    for (int k = 0; k < k_vec; k += kLanes) {
      for (int i = 0; i < kRows; ++i) {
        const float* a = A + static_cast<long>(m + i) * K + k;
        for (int l = 0; l < kLanes; ++l) acc[i][l] += a[l] * x[k + l];
      }
    }
    for (int i = 0; i < kRows; ++i) {
      double sum = (acc[i][0] + acc[i][1]) + (acc[i][2] + acc[i][3]);
      for (int k = k_vec; k < K; ++k) sum += A[static_cast<long>(m + i) * K + k] * x[k];
      y[m + i] += sum;
    }
  }
  for (; m < M; ++m) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += A[static_cast<long>(m) * K + k] * x[k];
    y[m] += sum;
  }
}

}  // namespace semdrive::detail
