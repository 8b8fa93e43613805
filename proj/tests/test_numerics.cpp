#include <doctest.h>

#include <cmath>
#include <vector>

#include "aptshield/errors.hpp"
#include "aptshield/grad_check.hpp"
#include "aptshield/matrix.hpp"
#include "aptshield/rng.hpp"

using namespace aptshield;
using num::Matrix;

namespace {

Matrix random_matrix(num::Rng& rng, std::size_t rows, std::size_t cols,
                     double lo = -2.0, double hi = 2.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

// Plain triple loop, the reference the kernel-backed product is checked against.
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                sum += a(i, k) * b(k, j);
            }
            c(i, j) = sum;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("matmul identity") {
    num::Rng rng(11);
    const Matrix m = random_matrix(rng, 2, 5);
    CHECK(num::matmul(Matrix::identity(2), m) == m);
}

TEST_CASE("matmul hand example") {
    const Matrix a(2, 2, {1, 2, 3, 4});
    const Matrix b(2, 1, {0, 1});
    const Matrix c = num::matmul(a, b);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 0) == 4.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
    num::Rng rng(21);
    const Matrix a = random_matrix(rng, 3, 4);
    const Matrix b = random_matrix(rng, 4, 2);
    const Matrix c = num::matmul(a, b);
    const Matrix ref = matmul_oracle(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(c.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("matmul shape error names both shapes") {
    const Matrix a(2, 3);
    const Matrix b(2, 2);
    CHECK_THROWS_WITH_AS(num::matmul(a, b),
                         doctest::Contains("2x3"), ShapeError);
}

TEST_CASE("matmul associativity on random conformable triples") {
    num::Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        const Matrix a = random_matrix(rng, 3, 4);
        const Matrix b = random_matrix(rng, 4, 5);
        const Matrix c = random_matrix(rng, 5, 2);
        const Matrix left = num::matmul(num::matmul(a, b), c);
        const Matrix right = num::matmul(a, num::matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i) {
            const double denom = std::max(1.0, std::abs(left.data()[i]));
            CHECK(std::abs(left.data()[i] - right.data()[i]) / denom < 1e-9);
        }
    }
}

TEST_CASE("activations") {
    const Matrix m(1, 3, {0.0, -3.2, 3.2});
    const Matrix sig = num::apply_activation(m, num::Activation::Sigmoid);
    CHECK(sig(0, 0) == 0.5);
    const Matrix rel = num::apply_activation(m, num::Activation::Relu);
    CHECK(rel(0, 1) == 0.0);
    CHECK(rel(0, 2) == 3.2);
    CHECK(num::apply_activation(m, num::Activation::Identity) == m);
}

TEST_CASE("sigmoid symmetry and range") {
    num::Rng rng(41);
    for (int t = 0; t < 100; ++t) {
        const double x = rng.uniform(-40.0, 40.0);
        const double s = num::sigmoid(x);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        CHECK(num::sigmoid(x) + num::sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rng determinism and seed sensitivity") {
    num::Rng a(12345), b(12345), c(54321);
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) diverged = true;
    }
    CHECK(diverged);
}

TEST_CASE("rng unit interval") {
    num::Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("grad_check quadratic") {
    std::vector<double> params{0.3, -1.2, 2.0};
    auto loss = [](std::span<const double> p) {
        double s = 0.0;
        for (double v : p) s += v * v;
        return s;
    };
    std::vector<double> grad{2 * params[0], 2 * params[1], 2 * params[2]};
    CHECK(num::grad_check(loss, params, grad, 1e-5) < 1e-8);
}

TEST_CASE("grad_check constant loss") {
    std::vector<double> params{1.0, 2.0};
    auto loss = [](std::span<const double>) { return 4.5; };
    std::vector<double> grad{0.0, 0.0};
    CHECK(num::grad_check(loss, params, grad, 1e-5) == 0.0);
}

TEST_CASE("grad_check rejects non-finite loss and bad eps") {
    std::vector<double> params{1.0};
    std::vector<double> grad{0.0};
    auto bad = [](std::span<const double>) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(num::grad_check(bad, params, grad, 1e-5), NumericError);
    auto ok = [](std::span<const double>) { return 0.0; };
    CHECK_THROWS_AS(num::grad_check(ok, params, grad, 0.0), DomainError);
}

TEST_CASE("matrix finiteness guard") {
    Matrix a(1, 2, {1e308, 1e308});
    CHECK_THROWS_AS(num::add(a, a), NumericError);
}
