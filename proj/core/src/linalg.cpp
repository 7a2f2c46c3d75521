#include "hmg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmg {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw DimensionMismatch(msg);
}

double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

} // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionMismatch("ragged initializer rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::operator*(const Mat& rhs) const {
    require(cols_ == rhs.rows_, "matrix product dimension mismatch");
    Mat out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
        }
    return out;
}

Mat Mat::operator+(const Mat& rhs) const {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix sum dimension mismatch");
    Mat out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

Mat Mat::operator-(const Mat& rhs) const {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "matrix difference dimension mismatch");
    Mat out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

Mat Mat::operator*(double s) const {
    Mat out = *this;
    for (double& v : out.data_) v *= s;
    return out;
}

double Mat::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double Mat::max_abs() const {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::abs(v));
    return best;
}

bool Mat::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Complex Poly::evaluate(Complex s) const {
    Complex acc = 0.0;
    for (double c : coeffs) acc = acc * s + c;
    return acc;
}

// ---------------------------------------------------------------------------
// QR (Householder, full Q)
// ---------------------------------------------------------------------------

QrResult qr_decompose(const Mat& a) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m == 0 || n == 0) throw DimensionMismatch("qr_decompose: empty input");
    if (m < n) throw DimensionMismatch("qr_decompose: requires rows >= cols");

    Mat r = a;
    Mat q = Mat::identity(m);
    std::vector<double> v(m);

    for (std::size_t k = 0; k < n && k + 1 < m; ++k) {
        double norm = 0.0, below = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
        for (std::size_t i = k + 1; i < m; ++i) below += std::abs(r(i, k));
        norm = std::sqrt(norm);
        if (norm == 0.0 || below == 0.0) continue;

        const double alpha = -sign_or_one(r(k, k)) * norm;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = r(i, k);
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;

        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i] * r(i, j);
            dot *= beta;
            for (std::size_t i = k; i < m; ++i) r(i, j) -= dot * v[i];
        }
        for (std::size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i] * q(j, i);
            dot *= beta;
            for (std::size_t i = k; i < m; ++i) q(j, i) -= dot * v[i];
        }
    }
    // enforce exact zeros in the trapezoid
    for (std::size_t i = 1; i < m; ++i)
        for (std::size_t j = 0; j < std::min(i, n); ++j) r(i, j) = 0.0;
    return {std::move(q), std::move(r)};
}

PivotedQr qr_col_pivot(const Mat& a) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m == 0 || n == 0) throw DimensionMismatch("qr_col_pivot: empty input");

    Mat r = a;
    Mat q = Mat::identity(m);
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n; ++j) perm[j] = j;

    std::vector<double> colnorm(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) colnorm[j] += r(i, j) * r(i, j);

    std::vector<double> v(m);
    const std::size_t steps = std::min(m, n);
    for (std::size_t k = 0; k < steps; ++k) {
        // pivot: bring the largest remaining column forward
        std::size_t piv = k;
        for (std::size_t j = k + 1; j < n; ++j)
            if (colnorm[j] > colnorm[piv]) piv = j;
        if (piv != k) {
            for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, piv));
            std::swap(colnorm[k], colnorm[piv]);
            std::swap(perm[k], perm[piv]);
        }

        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
        norm = std::sqrt(norm);
        if (norm != 0.0 && k + 1 < m) {
            const double alpha = -sign_or_one(r(k, k)) * norm;
            double vnorm2 = 0.0;
            for (std::size_t i = k; i < m; ++i) {
                v[i] = r(i, k);
                if (i == k) v[i] -= alpha;
                vnorm2 += v[i] * v[i];
            }
            if (vnorm2 > 0.0) {
                const double beta = 2.0 / vnorm2;
                for (std::size_t j = k; j < n; ++j) {
                    double dot = 0.0;
                    for (std::size_t i = k; i < m; ++i) dot += v[i] * r(i, j);
                    dot *= beta;
                    for (std::size_t i = k; i < m; ++i) r(i, j) -= dot * v[i];
                }
                for (std::size_t j = 0; j < m; ++j) {
                    double dot = 0.0;
                    for (std::size_t i = k; i < m; ++i) dot += v[i] * q(j, i);
                    dot *= beta;
                    for (std::size_t i = k; i < m; ++i) q(j, i) -= dot * v[i];
                }
            }
        }
        for (std::size_t j = k + 1; j < n; ++j) colnorm[j] -= r(k, j) * r(k, j);
        for (std::size_t i = k + 1; i < m; ++i) r(i, k) = 0.0;
    }
    return {std::move(q), std::move(r), std::move(perm)};
}

std::size_t rank_from_pivoted(const PivotedQr& f, double tol) {
    const std::size_t k = std::min(f.r.rows(), f.r.cols());
    if (k == 0) return 0;
    const double top = std::abs(f.r(0, 0));
    if (top == 0.0) return 0;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (std::abs(f.r(i, i)) > tol * top) ++rank;
    return rank;
}

// ---------------------------------------------------------------------------
// Hessenberg reduction
// ---------------------------------------------------------------------------

HessenbergResult hessenberg(const Mat& a) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("hessenberg: square nonempty input required");
    const std::size_t n = a.rows();
    Mat h = a;
    Mat q = Mat::identity(n);
    std::vector<double> v(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) norm += h(i, k) * h(i, k);
        norm = std::sqrt(norm);
        double below = 0.0;
        for (std::size_t i = k + 2; i < n; ++i) below += std::abs(h(i, k));
        if (norm == 0.0 || below == 0.0) continue;

        const double alpha = -sign_or_one(h(k + 1, k)) * norm;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = h(i, k);
            if (i == k + 1) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;

        // H <- P H P with P = I - beta v v^T acting on rows/cols k+1..n-1
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * h(i, j);
            dot *= beta;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
            dot *= beta;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * v[j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) dot += q(i, j) * v[j];
            dot *= beta;
            for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= dot * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
    // structural zeros below the subdiagonal, independent of the path above
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) h(i, j) = 0.0;
    return {std::move(h), std::move(q)};
}

// ---------------------------------------------------------------------------
// Eigenvalues: balance + Hessenberg + implicit double-shift QR
// ---------------------------------------------------------------------------

namespace {

// Parlett-Reinsch diagonal balancing (radix 2); similarity, eigenvalues kept.
void balance_in_place(Mat& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0, radix2 = 4.0;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) { c *= radix2; f *= radix; }
            while (c > r * radix) { c /= radix2; f /= radix; }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// eigenvalues of a real 2x2 block; complex pairs are exact conjugates
void push_eig2(double a, double b, double c, double d, std::vector<Complex>& out) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
        const double rt = std::sqrt(disc);
        double l1 = 0.5 * tr + (tr >= 0.0 ? rt : -rt);
        double l2;
        if (l1 != 0.0) l2 = det / l1;
        else l2 = 0.5 * tr - (tr >= 0.0 ? rt : -rt);
        out.emplace_back(l1, 0.0);
        out.emplace_back(l2, 0.0);
    } else {
        const double w = std::sqrt(-disc);
        out.emplace_back(0.5 * tr, w);
        out.emplace_back(0.5 * tr, -w);
    }
}

// Householder vector for a length-2/3 column; returns false if no-op.
bool house_small(double* x, std::size_t len, double* v) {
    double norm = 0.0;
    for (std::size_t i = 0; i < len; ++i) norm += x[i] * x[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        v[i] = x[i];
        if (i == 0) v[i] += sign_or_one(x[0]) * norm;
        vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) return false;
    const double inv = std::sqrt(1.0 / vnorm2);
    for (std::size_t i = 0; i < len; ++i) v[i] *= inv;
    return true;
}

// Francis double-shift sweeps with deflation on the active block [lo..hi].
// Updates are confined to the active diagonal block; the spectrum of a block
// triangular matrix is the union of its diagonal blocks, so eigenvalues are
// unaffected by the discarded coupling.
std::vector<Complex> francis_eigs(Mat h) {
    const std::size_t n = h.rows();
    std::vector<Complex> ev;
    ev.reserve(n);

    long hi = static_cast<long>(n) - 1;
    const long cap = 50 * static_cast<long>(n);
    long sweeps = 0;
    int stall = 0;

    while (hi >= 0) {
        if (hi == 0) {
            ev.emplace_back(h(0, 0), 0.0);
            --hi;
            continue;
        }
        // deflation scan from the bottom of the active block
        long lo = hi;
        while (lo > 0) {
            const double s = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            const double thr = s > 0.0 ? 1e-14 * s : std::numeric_limits<double>::denorm_min();
            if (std::abs(h(lo, lo - 1)) <= thr) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            ev.emplace_back(h(hi, hi), 0.0);
            --hi;
            stall = 0;
            continue;
        }
        if (lo == hi - 1) {
            push_eig2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi), ev);
            hi -= 2;
            stall = 0;
            continue;
        }

        if (++sweeps > cap)
            throw NonConvergence("eig_qr: shifted QR failed to deflate within 50 n sweeps");
        ++stall;

        // shift pair from the trailing 2x2 block; stalled blocks get an
        // exceptional pair anchored at a diagonal entry (clustered complex
        // pairs can flip-flop the trailing estimate forever otherwise)
        double ss, tt;
        if (stall % 20 == 10) {
            const double sx = std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2));
            const double anchor = 0.75 * sx + h(hi, hi);
            ss = 2.0 * anchor;
            tt = anchor * anchor + 0.4375 * sx * sx;
        } else if (stall % 20 == 0) {
            const double sx = std::abs(h(lo + 1, lo)) + std::abs(h(lo + 2, lo + 1));
            const double anchor = 0.75 * sx + h(lo, lo);
            ss = 2.0 * anchor;
            tt = anchor * anchor + 0.4375 * sx * sx;
        } else {
            ss = h(hi - 1, hi - 1) + h(hi, hi);
            tt = h(hi - 1, hi - 1) * h(hi, hi) - h(hi - 1, hi) * h(hi, hi - 1);
        }

        double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - ss * h(lo, lo) + tt;
        double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - ss);
        double z = h(lo + 1, lo) * h(lo + 2, lo + 1);

        double v[3];
        for (long k = lo - 1; k <= hi - 3; ++k) {
            double col[3] = {x, y, z};
            if (house_small(col, 3, v)) {
                const long q0 = std::max(lo, k);
                // rows k+1..k+3, columns q0..hi
                for (long j = q0; j <= hi; ++j) {
                    double dot = v[0] * h(k + 1, j) + v[1] * h(k + 2, j) + v[2] * h(k + 3, j);
                    dot *= 2.0;
                    h(k + 1, j) -= dot * v[0];
                    h(k + 2, j) -= dot * v[1];
                    h(k + 3, j) -= dot * v[2];
                }
                // rows lo..min(k+4,hi), columns k+1..k+3
                const long r1 = std::min(k + 4, hi);
                for (long i = lo; i <= r1; ++i) {
                    double dot = h(i, k + 1) * v[0] + h(i, k + 2) * v[1] + h(i, k + 3) * v[2];
                    dot *= 2.0;
                    h(i, k + 1) -= dot * v[0];
                    h(i, k + 2) -= dot * v[1];
                    h(i, k + 3) -= dot * v[2];
                }
            }
            x = h(k + 2, k + 1);
            y = h(k + 3, k + 1);
            if (k < hi - 3) z = h(k + 4, k + 1);
        }
        double col2[2] = {x, y};
        if (house_small(col2, 2, v)) {
            for (long j = hi - 2; j <= hi; ++j) {
                double dot = 2.0 * (v[0] * h(hi - 1, j) + v[1] * h(hi, j));
                h(hi - 1, j) -= dot * v[0];
                h(hi, j) -= dot * v[1];
            }
            for (long i = lo; i <= hi; ++i) {
                double dot = 2.0 * (h(i, hi - 1) * v[0] + h(i, hi) * v[1]);
                h(i, hi - 1) -= dot * v[0];
                h(i, hi) -= dot * v[1];
            }
        }
    }
    return ev;
}

} // namespace

std::vector<Complex> eig_qr(const Mat& a) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("eig_qr: square nonempty input required");
    if (!a.all_finite()) throw DimensionMismatch("eig_qr: non-finite entries");
    const std::size_t n = a.rows();
    if (n == 1) return {Complex(a(0, 0), 0.0)};

    Mat b = a;
    balance_in_place(b);
    Mat h = hessenberg(b).h;
    return francis_eigs(std::move(h));
}

// ---------------------------------------------------------------------------
// Characteristic polynomial (Faddeev-LeVerrier) and companion roots
// ---------------------------------------------------------------------------

CharPolyResult char_poly(const Mat& a) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("char_poly: square nonempty input required");
    const std::size_t n = a.rows();
    if (n > 60) throw SizeLimit("char_poly: n > 60 is outside the reliable range of the recurrence");

    CharPolyResult out;
    out.p.coeffs.assign(n + 1, 0.0);
    out.p.coeffs[0] = 1.0;
    Mat m = Mat::identity(n);
    out.adj_coeffs.push_back(m);
    for (std::size_t k = 1; k <= n; ++k) {
        Mat am = a * m;
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
        const double ck = -tr / static_cast<double>(k);
        out.p.coeffs[k] = ck;
        if (k < n) {
            m = am + Mat::identity(n) * ck;
            out.adj_coeffs.push_back(m);
        }
    }
    return out;
}

std::vector<Complex> companion_roots(const Poly& p) {
    // strip exact leading zeros first
    std::size_t first = 0;
    while (first < p.coeffs.size() && p.coeffs[first] == 0.0) ++first;
    const std::size_t deg = p.coeffs.size() - first == 0 ? 0 : p.coeffs.size() - first - 1;
    if (first == p.coeffs.size()) throw ZeroPolynomial("companion_roots: zero polynomial");
    if (deg == 0) return {};

    const double lead = p.coeffs[first];
    Mat c(deg, deg);
    for (std::size_t j = 0; j < deg; ++j) c(0, j) = -p.coeffs[first + 1 + j] / lead;
    for (std::size_t i = 1; i < deg; ++i) c(i, i - 1) = 1.0;
    return eig_qr(c);
}

// ---------------------------------------------------------------------------
// Linear solve, nullspace, matrix exponential
// ---------------------------------------------------------------------------

Mat solve_linear(const Mat& a, const Mat& b) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("solve_linear: square nonempty a required");
    if (b.rows() != a.rows()) throw DimensionMismatch("solve_linear: rhs row count mismatch");
    const std::size_t n = a.rows(), m = b.cols();
    const double pivot_floor = 1e-13 * a.norm_inf();

    Mat lu = a;
    Mat x = b;
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
        if (std::abs(lu(p, k)) < pivot_floor || lu(p, k) == 0.0)
            throw Singular("solve_linear: pivot below threshold at column " + std::to_string(k));
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(x(k, j), x(p, j));
        }
        const double inv = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) * inv;
            if (f == 0.0) continue;
            lu(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (std::size_t j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, j);
            for (std::size_t k2 = i + 1; k2 < n; ++k2) s -= lu(i, k2) * x(k2, j);
            x(i, j) = s / lu(i, i);
        }
    }
    return x;
}

Mat nullspace_basis(const Mat& m, double tol) {
    if (m.empty()) throw DimensionMismatch("nullspace_basis: empty input");
    const std::size_t c = m.cols();
    PivotedQr f = qr_col_pivot(m.transpose());
    const std::size_t rank = rank_from_pivoted(f, tol);
    Mat basis(c, c - rank);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = rank; j < c; ++j) basis(i, j - rank) = f.q(i, j);
    return basis;
}

Mat expm_scaled(const Mat& a, double t) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("expm_scaled: square nonempty input required");
    if (!std::isfinite(t)) throw DimensionMismatch("expm_scaled: non-finite t");
    const std::size_t n = a.rows();

    Mat x = a * t;
    int squarings = 0;
    double norm = x.norm_inf();
    if (!std::isfinite(norm)) throw Overflow("expm_scaled: input scale overflow");
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    if (squarings > 0) x = x * std::ldexp(1.0, -squarings);

    // diagonal (6,6) Pade: N = sum c_j X^j, D with alternating signs
    static const double c[7] = {1.0,        1.0 / 2.0,    5.0 / 44.0,  1.0 / 66.0,
                                1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    Mat pow = Mat::identity(n);
    Mat num = Mat::identity(n);
    Mat den = Mat::identity(n);
    for (int j = 1; j <= 6; ++j) {
        pow = pow * x;
        num = num + pow * c[j];
        den = den + pow * (j % 2 ? -c[j] : c[j]);
    }
    Mat e = solve_linear(den, num);
    for (int s = 0; s < squarings; ++s) e = e * e;
    if (!e.all_finite()) throw Overflow("expm_scaled: non-finite result");
    return e;
}

} // namespace hmg
