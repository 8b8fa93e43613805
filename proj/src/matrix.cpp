#include "aptshield/matrix.hpp"

#include <cmath>
#include <limits>

#include "aptshield/errors.hpp"
#include "aptshield/kernels.hpp"

namespace aptshield::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::require_finite(const char* what) const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite entry in ") + what);
        }
    }
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " does not conform to " +
                         b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    kernels::active_kernels().matmul(a.data(), b.data(), c.data(), a.rows(),
                                     a.cols(), b.cols());
    c.require_finite("matmul result");
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            t(j, i) = m(i, j);
        }
    }
    return t;
}

double sigmoid(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    // Saturated values round to exactly 0 or 1 in double precision; pull
    // them back so outputs stay strictly inside (0,1).
    if (s >= 1.0) return std::nextafter(1.0, 0.0);
    if (s <= 0.0) return std::numeric_limits<double>::min();
    return s;
}

Matrix apply_activation(const Matrix& m, Activation kind) {
    Matrix out(m.rows(), m.cols());
    switch (kind) {
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < m.size(); ++i) {
                out.data()[i] = sigmoid(m.data()[i]);
            }
            break;
        case Activation::Relu:
            kernels::active_kernels().relu(out.data(), m.data(), m.size());
            break;
        case Activation::Identity:
            out = m;
            break;
    }
    out.require_finite("activation result");
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    kernels::active_kernels().add(c.data(), b.data(), c.size());
    c.require_finite("add result");
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix c = a;
    kernels::active_kernels().sub(c.data(), b.data(), c.size());
    c.require_finite("sub result");
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c = a;
    kernels::active_kernels().hadamard(c.data(), b.data(), c.size());
    c.require_finite("hadamard result");
    return c;
}

Matrix scale(const Matrix& a, double alpha) {
    Matrix c = a;
    kernels::active_kernels().scale(c.data(), alpha, c.size());
    c.require_finite("scale result");
    return c;
}

void add_in_place(Matrix& y, const Matrix& x) {
    require_same_shape(y, x, "add_in_place");
    kernels::active_kernels().add(y.data(), x.data(), y.size());
    y.require_finite("add_in_place result");
}

void axpy_in_place(Matrix& y, double alpha, const Matrix& x) {
    require_same_shape(y, x, "axpy_in_place");
    kernels::active_kernels().axpy(y.data(), alpha, x.data(), y.size());
    y.require_finite("axpy_in_place result");
}

Matrix add_row_broadcast(const Matrix& m, std::span<const double> bias) {
    if (bias.size() != m.cols()) {
        throw ShapeError("add_row_broadcast: bias length " +
                         std::to_string(bias.size()) + " vs cols " +
                         std::to_string(m.cols()));
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        kernels::active_kernels().add(out.data() + i * m.cols(), bias.data(),
                                      m.cols());
    }
    out.require_finite("add_row_broadcast result");
    return out;
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        kernels::active_kernels().add(sums.data(), m.data() + i * m.cols(),
                                      m.cols());
    }
    return sums;
}

}  // namespace aptshield::num
