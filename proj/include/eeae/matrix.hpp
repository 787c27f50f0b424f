#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eeae {

/// Thrown for any shape disagreement between operands.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles. Examples are stored as rows.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::string shape_string() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a · bᵀ, shapes (n×k)·(m×k)ᵀ → n×m.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ · b, shapes (k×n)ᵀ·(k×m) → n×m.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a · b, shapes (n×k)·(k×m) → n×m.
Matrix matmul_nn(const Matrix& a, const Matrix& b);

/// Gathers the given rows of `m` into a new matrix, in order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);
/// Stacks `bottom` under `top`; column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

void add_inplace(Matrix& acc, const Matrix& other);
bool all_finite(std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
/// Flattened ℓp norm, p ≥ 1.
double norm_p(std::span<const double> v, double p);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace eeae
