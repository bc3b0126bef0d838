#pragma once

// Register-blocked dense kernels for the network's im2col convolutions and
// fully connected layers. Weights are float, activations double. Every
// kernel accumulates into C and uses a fixed summation order.

namespace semdrive::detail {

/// C[M x N] += A[M x K] * B[K x N]
void gemm_acc(int M, int N, int K, const float* A, const double* B, double* C);

/// C[M x K] += A[M x N] * B[K x N]^T
void gemm_abt_acc(int M, int K, int N, const double* A, const double* B, double* C);

/// C[K x N] += A[M x K]^T * B[M x N]
void gemm_atb_acc(int M, int K, int N, const float* A, const double* B, double* C);

/// y[M] += A[M x K] * x[K]
void gemv_acc(int M, int K, const float* A, const double* x, double* y);

}  // namespace semdrive::detail
