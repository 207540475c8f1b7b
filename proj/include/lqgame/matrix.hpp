#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqgame {

// Dense row-major matrix of doubles. Problem sizes here are tiny (n <= ~10),
// so everything is straightforward O(n^3) with no blocking.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Matrix transpose() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool all_finite() const;
    double norm_inf() const;    // max absolute entry
    double norm_fro() const;
    double asymmetry() const;   // max |M_ij - M_ji|

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator-(Matrix a) { return a *= -1.0; }
    friend Matrix operator*(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// (M + M^T)/2
Matrix symmetrize(const Matrix& m);

// Stacks [a b] side by side.
Matrix hcat(const Matrix& a, const Matrix& b);
// blockdiag(a, b)
Matrix block_diag(const Matrix& a, const Matrix& b);
// Contiguous sub-block.
Matrix slice_rows(const Matrix& m, std::size_t row0, std::size_t nrows);

// Frobenius inner product <A, B> = tr(A^T B).
double dot_fro(const Matrix& a, const Matrix& b);

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(std::size_t pivot)
        : std::runtime_error("singular matrix at pivot " + std::to_string(pivot)),
          pivot_index(pivot) {}
    std::size_t pivot_index;
};

// Gauss-Jordan inversion with partial pivoting. Throws SingularMatrixError
// when a pivot falls below 1e-12 times the row scale.
Matrix invert(const Matrix& m);

struct DefinitenessMargin {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// The input is symmetrized internally.
std::vector<double> sym_eigenvalues(const Matrix& m);

DefinitenessMargin eig_margin(const Matrix& m);

// Smallest singular value, via the spectrum of M^T M.
double smallest_singular_value(const Matrix& m);

} // namespace lqgame
