#pragma once

#include <cstddef>

namespace dsnav::kernels {

enum class Backend { Scalar, Avx2 };

/// Flat double-array kernels behind every dense matrix/vector operation in
/// the library. One scalar reference implementation and one AVX2+FMA variant
/// share this table; the active one is chosen at runtime from CPU features
/// (overridable via select() or the DSNAV_KERNELS environment variable).
/// All matrices are row-major and output buffers must not alias inputs.
struct Ops {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// x *= alpha
    void (*scal)(double alpha, double* x, std::size_t n);
    /// out = a + b
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    /// out = a - b
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    /// C(m x n) = A(m x k) * B(k x n)
    void (*matmul)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
    /// C(m x n) = A(m x k) * B^T with B stored as (n x k)
    void (*matmul_bt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
    /// C(m x n) = A^T * B with A stored as (k x m), B as (k x n)
    void (*matmul_at)(const double* a, const double* b, double* c, std::size_t k, std::size_t m, std::size_t n);
};

const Ops& scalar_ops();

/// AVX2 table compiled in and usable on this CPU.
bool avx2_available();

/// Force a backend; throws dsnav::Error if it is unavailable.
void select(Backend backend);

/// CPU probe; DSNAV_KERNELS=scalar|avx2 overrides.
void select_auto();

Backend active_backend();

/// Active kernel table. Auto-selects on first use.
const Ops& ops();

}  // namespace dsnav::kernels
