#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aptshield::num {

// Dense row-major matrix of 64-bit reals. Public operations keep every entry
// finite; producing a NaN/Inf raises NumericError.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    // Throws NumericError naming `what` if any entry is NaN or infinite.
    void require_finite(const char* what) const;

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Activation { Sigmoid, Relu, Identity };

// Standard product; shapes must conform (a.cols == b.rows).
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix apply_activation(const Matrix& m, Activation kind);

// Elementwise helpers used by the training loops.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double alpha);
void add_in_place(Matrix& y, const Matrix& x);
void axpy_in_place(Matrix& y, double alpha, const Matrix& x);

// Adds bias[j] to every entry of column j.
Matrix add_row_broadcast(const Matrix& m, std::span<const double> bias);
// Column sums as a vector of length m.cols().
std::vector<double> column_sums(const Matrix& m);

double sigmoid(double x);

}  // namespace aptshield::num
