#include "aptshield/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define APTSHIELD_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define APTSHIELD_HAVE_AVX2_BUILD 0
#endif

#include <cstring>

namespace aptshield::kernels {

#if APTSHIELD_HAVE_AVX2_BUILD

namespace {

// All loops use mul+add (never FMA) and keep the scalar accumulation order
// per output element, so results are bit-identical to kernels_scalar.cpp.

void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = b + kk * n;
            const __m256d avv = _mm256_set1_pd(av);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d cv = _mm256_loadu_pd(crow + j);
                __m256d bv = _mm256_loadu_pd(brow + j);
                cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, bv));
                _mm256_storeu_pd(crow + j, cv);
            }
            for (; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void add_avx2(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        __m256d xv = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yv, xv));
    }
    for (; i < n; ++i) y[i] += x[i];
}

void sub_avx2(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        __m256d xv = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_sub_pd(yv, xv));
    }
    for (; i < n; ++i) y[i] -= x[i];
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        __m256d xv = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_avx2(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        __m256d xv = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_mul_pd(yv, xv));
    }
    for (; i < n; ++i) y[i] *= x[i];
}

void scale_avx2(double* y, double alpha, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_mul_pd(yv, av));
    }
    for (; i < n; ++i) y[i] *= alpha;
}

void relu_avx2(double* y, const double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        // max_pd(x, 0) returns the second operand unless x > 0, matching
        // the scalar branch (x > 0 ? x : 0) bitwise, including -0.0.
        _mm256_storeu_pd(y + i, _mm256_max_pd(xv, zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace

const Kernels* avx2_kernels() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Kernels table{
        "avx2",
        &matmul_avx2,
        &add_avx2,
        &sub_avx2,
        &axpy_avx2,
        &hadamard_avx2,
        &scale_avx2,
        &relu_avx2,
    };
    return &table;
}

#else

const Kernels* avx2_kernels() { return nullptr; }

#endif  // APTSHIELD_HAVE_AVX2_BUILD

}  // namespace aptshield::kernels
