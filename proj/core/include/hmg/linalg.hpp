#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "hmg/errors.hpp"

namespace hmg {

using Complex = std::complex<double>;

/// Dense real matrix, row-major. Zero-sized matrices are permitted so that
/// static (memoryless) blocks can be represented; the numeric kernels below
/// require nonempty inputs and say so.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Mat transpose() const;
    Mat operator*(const Mat& rhs) const;
    Mat operator+(const Mat& rhs) const;
    Mat operator-(const Mat& rhs) const;
    Mat operator*(double s) const;

    /// max row sum of absolute values (induced inf-norm); 0 for empty
    double norm_inf() const;
    /// largest absolute entry; 0 for empty
    double max_abs() const;
    bool all_finite() const;
    bool is_square() const { return rows_ == cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Real polynomial, coefficients in descending powers, leading first.
struct Poly {
    std::vector<double> coeffs;

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
    Complex evaluate(Complex s) const;
};

struct QrResult {
    Mat q; ///< orthogonal, rows x rows
    Mat r; ///< upper-trapezoidal, rows x cols
};

/// Householder QR of a (rows >= cols). Rank deficiency is permitted.
QrResult qr_decompose(const Mat& a);

struct HessenbergResult {
    Mat h; ///< upper Hessenberg, exact zeros below the first subdiagonal
    Mat q; ///< orthogonal accumulation, h = q^T a q
};

HessenbergResult hessenberg(const Mat& a);

/// Eigenvalues of a square real matrix: balancing, Householder reduction to
/// Hessenberg form, then implicit double-shift QR iteration with deflation.
/// Complex pairs come back as exact conjugates. Throws NonConvergence if the
/// sweep budget (50 n) is exhausted before full deflation.
std::vector<Complex> eig_qr(const Mat& a);

struct CharPolyResult {
    Poly p;                     ///< monic characteristic polynomial det(sI - a)
    std::vector<Mat> adj_coeffs; ///< matrix coefficients of adj(sI - a), descending powers
};

/// Faddeev-LeVerrier recurrence. Reliable oracle for small n; capped at n = 60.
CharPolyResult char_poly(const Mat& a);

/// Roots of p as eigenvalues of its companion matrix.
std::vector<Complex> companion_roots(const Poly& p);

/// Solve a x = b by partially pivoted elimination. Throws Singular when a
/// pivot falls below 1e-13 * ||a||_inf.
Mat solve_linear(const Mat& a, const Mat& b);

/// Orthonormal basis of {x : m x = 0}, rank revealed by column-pivoted QR of
/// m^T; `tol` is relative to the largest diagonal of R. A full-rank wide or
/// square input yields a matrix with zero columns.
Mat nullspace_basis(const Mat& m, double tol);

/// e^(a t) by scaling-and-squaring with the order-6 diagonal Pade approximant.
Mat expm_scaled(const Mat& a, double t);

// --- smaller kernels shared across modules ---

struct PivotedQr {
    Mat q, r;
    std::vector<std::size_t> perm; ///< column permutation: r columns correspond to a.perm[j]
};

PivotedQr qr_col_pivot(const Mat& a);

/// numerical rank from a pivoted QR at relative tolerance `tol`
std::size_t rank_from_pivoted(const PivotedQr& f, double tol);

} // namespace hmg
