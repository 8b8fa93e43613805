#include <doctest.h>

#include <cstring>
#include <vector>

#include "aptshield/kernels.hpp"
#include "aptshield/rng.hpp"

using namespace aptshield;

namespace {

std::vector<double> random_buffer(num::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(-3.0, 3.0);
        if (rng.next_unit() < 0.05) x = -0.0;  // exercise signed zero
    }
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

// The AVX2 kernels are written to reproduce the scalar results bit for bit
// (same per-element operation order, no FMA); verify exactly, including
// sizes that exercise the vector remainder loops.
TEST_CASE("avx2 kernels bit-match the scalar reference") {
    const kernels::Kernels& scalar = kernels::scalar_kernels();
    const kernels::Kernels* avx2 = kernels::avx2_kernels();
    if (avx2 == nullptr) {
        MESSAGE("AVX2 unavailable on this CPU; dispatch falls back to scalar");
        CHECK(std::strcmp(kernels::active_kernels().name, "scalar") == 0);
        return;
    }

    num::Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + rng.next_below(7);
        const std::size_t k = 1 + rng.next_below(9);
        const std::size_t n = 1 + rng.next_below(11);

        const auto a = random_buffer(rng, m * k);
        const auto b = random_buffer(rng, k * n);
        std::vector<double> c_scalar(m * n), c_avx2(m * n);
        scalar.matmul(a.data(), b.data(), c_scalar.data(), m, k, n);
        avx2->matmul(a.data(), b.data(), c_avx2.data(), m, k, n);
        REQUIRE(bit_equal(c_scalar, c_avx2));

        const std::size_t len = 1 + rng.next_below(37);
        const auto x = random_buffer(rng, len);
        const auto y0 = random_buffer(rng, len);
        const double alpha = rng.uniform(-2.0, 2.0);

        auto ys = y0, yv = y0;
        scalar.add(ys.data(), x.data(), len);
        avx2->add(yv.data(), x.data(), len);
        REQUIRE(bit_equal(ys, yv));

        ys = y0; yv = y0;
        scalar.sub(ys.data(), x.data(), len);
        avx2->sub(yv.data(), x.data(), len);
        REQUIRE(bit_equal(ys, yv));

        ys = y0; yv = y0;
        scalar.axpy(ys.data(), alpha, x.data(), len);
        avx2->axpy(yv.data(), alpha, x.data(), len);
        REQUIRE(bit_equal(ys, yv));

        ys = y0; yv = y0;
        scalar.hadamard(ys.data(), x.data(), len);
        avx2->hadamard(yv.data(), x.data(), len);
        REQUIRE(bit_equal(ys, yv));

        ys = y0; yv = y0;
        scalar.scale(ys.data(), alpha, len);
        avx2->scale(yv.data(), alpha, len);
        REQUIRE(bit_equal(ys, yv));

        std::vector<double> rs(len), rv(len);
        scalar.relu(rs.data(), x.data(), len);
        avx2->relu(rv.data(), x.data(), len);
        REQUIRE(bit_equal(rs, rv));
    }
}

TEST_CASE("kernel dispatch picks a valid table") {
    const kernels::Kernels& active = kernels::active_kernels();
    const bool is_scalar = std::strcmp(active.name, "scalar") == 0;
    const bool is_avx2 = std::strcmp(active.name, "avx2") == 0;
    CHECK((is_scalar || is_avx2));
    if (is_avx2) CHECK(kernels::avx2_kernels() != nullptr);
}
