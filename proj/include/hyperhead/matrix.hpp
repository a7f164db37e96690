#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperhead {

// Thrown on any shape mismatch; message names both shapes.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major matrix of 64-bit reals. The sole numeric carrier of the
// library: contexts, projections, score planes and gradients all use it.
// Values are treated as immutable once shared across threads.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Matrix row(std::size_t r) const;              // 1 x cols copy
    void set_row(std::size_t r, const Matrix& v); // v is 1 x cols
    Matrix transpose() const;

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// C = A * B (shape-checked).
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B and C = A * B^T without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
void add_inplace(Matrix& a, const Matrix& b);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
// max |a-b| / (max(|a|,|b|) + floor); shape-checked.
double max_rel_diff(const Matrix& a, const Matrix& b, double floor = 1e-30);
double frobenius_norm(const Matrix& a);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues (descending) and fills V with matching eigenvectors in
// columns. Intended for the small (d <= 64) analysis problems only.
std::vector<double> symmetric_eigen(const Matrix& m, Matrix& eigvecs);

// Singular values of a (descending), via the Gram matrix. Small inputs only.
std::vector<double> singular_values(const Matrix& a);

// Numerical rank: count of singular values > rel_tol * sigma_max. Singular
// values come from the Gram matrix, whose eigenvalue noise is ~eps relative;
// after the square root that is ~sqrt(eps) ~ 1e-8, so the cutoff must sit
// safely above it.
std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-6);

// Orthonormal basis (rows) of the row space of a, by modified Gram-Schmidt.
Matrix orthonormal_rowspace(const Matrix& a, double drop_tol = 1e-10);

} // namespace hyperhead
