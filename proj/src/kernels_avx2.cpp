// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma on x86; the dispatcher only hands the table out after a
// runtime CPU feature check.

#include "dsnav/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstring>

namespace dsnav::kernels {
namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum256(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

// Row-of-C accumulation: broadcast A(i,p), FMA across the B row. Matches the
// scalar reference's loop nest so results differ only by FMA rounding.
void matmul_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d aip = _mm256_set1_pd(a[i * k + p]);
            const double* brow = b + p * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                vc = _mm256_fmadd_pd(aip, _mm256_loadu_pd(brow + j), vc);
                _mm256_storeu_pd(crow + j, vc);
            }
            const double s = a[i * k + p];
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void matmul_bt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            c[i * n + j] = dot_avx2(a + i * k, b + j * k, k);
        }
    }
}

void matmul_at_avx2(const double* a, const double* b, double* c, std::size_t k, std::size_t m, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const __m256d api = _mm256_set1_pd(arow[i]);
            double* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                vc = _mm256_fmadd_pd(api, _mm256_loadu_pd(brow + j), vc);
                _mm256_storeu_pd(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += arow[i] * brow[j];
        }
    }
}

}  // namespace

const Ops* avx2_ops_or_null() {
    static const Ops table{
        "avx2",        dot_avx2,       axpy_avx2,      scal_avx2,
        add_avx2,      sub_avx2,       matmul_avx2,    matmul_bt_avx2,
        matmul_at_avx2,
    };
    return &table;
}

}  // namespace dsnav::kernels

#else

namespace dsnav::kernels {

const Ops* avx2_ops_or_null() { return nullptr; }

}  // namespace dsnav::kernels

#endif
