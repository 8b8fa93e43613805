#pragma once

#include <cstddef>

namespace aptshield::kernels {

// Low-level dense kernels behind the Matrix operations. Two implementations
// exist: a scalar reference and an AVX2 variant selected at runtime. The AVX2
// kernels are written to be bit-identical to the scalar ones: per output
// element they perform the same IEEE multiply/add sequence in the same order
// (no FMA contraction, no reassociated reductions), so the equivalence tests
// assert exact equality.
struct Kernels {
    const char* name;

    // c (m x n) = a (m x k) * b (k x n), all row-major. c must not alias a/b.
    void (*matmul)(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

    // y[i] += x[i]
    void (*add)(double* y, const double* x, std::size_t n);
    // y[i] -= x[i]
    void (*sub)(double* y, const double* x, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    // y[i] *= x[i]
    void (*hadamard)(double* y, const double* x, std::size_t n);
    // y[i] *= alpha
    void (*scale)(double* y, double alpha, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(double* y, const double* x, std::size_t n);
};

// Scalar reference kernels; always available.
const Kernels& scalar_kernels();

// AVX2 kernels, or nullptr when the build target or CPU lacks AVX2 support.
const Kernels* avx2_kernels();

// The kernel set in use. Picks AVX2 when available; the environment variable
// APTSHIELD_KERNELS=scalar|avx2 overrides the choice (forcing avx2 on an
// unsupported CPU falls back to scalar).
const Kernels& active_kernels();

}  // namespace aptshield::kernels
