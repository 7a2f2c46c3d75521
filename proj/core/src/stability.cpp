#include "hmg/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmg {

// ---------------------------------------------------------------------------
// eigenvalue reporting
// ---------------------------------------------------------------------------

EigenReport report_from_eigenvalues(std::vector<Complex> eigs) {
    EigenReport rep;
    std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    rep.stable = true;
    rep.spectral_abscissa = -std::numeric_limits<double>::infinity();
    for (const Complex& l : eigs) {
        EigenEntry e;
        e.lambda = l;
        const double mag = std::abs(l);
        if (mag == 0.0) e.damping = 0.0;
        else if (l.imag() == 0.0) e.damping = l.real() < 0.0 ? 1.0 : -1.0;
        else e.damping = -l.real() / mag;
        e.freq_hz = std::abs(l.imag()) / (2.0 * M_PI);
        rep.entries.push_back(e);
        rep.stable = rep.stable && l.real() < 0.0;
        rep.spectral_abscissa = std::max(rep.spectral_abscissa, l.real());
    }
    if (eigs.empty()) rep.spectral_abscissa = 0.0;
    return rep;
}

EigenReport eigen_report(const Lti& m) { return report_from_eigenvalues(eig_qr(m.a)); }

// ---------------------------------------------------------------------------
// droop sweep
// ---------------------------------------------------------------------------

SweepResult droop_sweep(const GridConfig& cfg, const std::string& scope,
                        double from, double to, double step) {
    if (!(from < to)) throw ConfigError("sweep", "empty range: from must be below to");
    if (!(step > 0)) throw ConfigError("sweep", "step must be positive");
    const std::size_t count =
        static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;

    SweepResult out;
    out.points.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        SweepPoint pt;
        pt.m_dc = from + static_cast<double>(k) * step;
        GridConfig swept = cfg;
        for (auto& c : swept.dc_converters) c.ctrl.m_dc = pt.m_dc;
        try {
            const Lti model = build_scope(swept, scope);
            pt.eigenvalues = eig_qr(model.a);
            pt.spectral_abscissa = -std::numeric_limits<double>::infinity();
            for (const Complex& l : pt.eigenvalues)
                pt.spectral_abscissa = std::max(pt.spectral_abscissa, l.real());
            pt.ok = true;
        } catch (const Error& e) {
            pt.ok = false;
            pt.error = e.what();
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

std::vector<Crossing> detect_crossing(const SweepResult& s) {
    std::vector<Crossing> out;
    for (std::size_t k = 0; k + 1 < s.points.size(); ++k) {
        const SweepPoint& a = s.points[k];
        const SweepPoint& b = s.points[k + 1];
        if (!a.ok || !b.ok) continue;
        const bool a_neg = a.spectral_abscissa < 0.0;
        const bool b_neg = b.spectral_abscissa < 0.0;
        if (a_neg == b_neg) continue;
        const SweepPoint& unstable = a_neg ? b : a;
        Complex rightmost = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (const Complex& l : unstable.eigenvalues)
            if (l.real() > best) { best = l.real(); rightmost = l; }
        Crossing c{k, k + 1,
                   std::abs(rightmost.imag()) > 1e-6 ? CrossingKind::hopf
                                                     : CrossingKind::real_crossing};
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// pole placement (inverse eigenvalue problem)
// ---------------------------------------------------------------------------

namespace {

struct TargetGroup {
    Complex lambda;   ///< representative (Im >= 0)
    bool complex_pair;
};

std::vector<TargetGroup> group_targets(const std::vector<Complex>& targets) {
    std::vector<TargetGroup> groups;
    std::vector<bool> used(targets.size(), false);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (used[i]) continue;
        const Complex t = targets[i];
        if (t.imag() == 0.0) {
            groups.push_back({t, false});
            used[i] = true;
            continue;
        }
        // find the conjugate partner
        std::size_t partner = targets.size();
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            if (used[j]) continue;
            const Complex u = targets[j];
            const double scale = std::max({std::abs(t), std::abs(u), 1.0});
            if (std::abs(u - std::conj(t)) <= 1e-12 * scale) { partner = j; break; }
        }
        if (partner == targets.size())
            throw TargetCountMismatch("targets are not closed under conjugation near " +
                                      std::to_string(t.real()));
        used[i] = used[partner] = true;
        groups.push_back({t.imag() > 0.0 ? t : std::conj(t), true});
    }
    return groups;
}

// real doubling of the complex matrix u1t (a - lambda I); null space columns
// come back as complex n-vectors
std::vector<std::vector<Complex>> complex_nullspace(const Mat& u1t, const Mat& a, Complex lambda) {
    const std::size_t rows = u1t.rows(), n = a.rows();
    // m_c = u1t * (a - lambda I) split into real and imaginary parts
    Mat mre(rows, n), mim(rows, n);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += u1t(i, k) * a(k, j);
            mre(i, j) = acc - lambda.real() * u1t(i, j);
            mim(i, j) = -lambda.imag() * u1t(i, j);
        }
    if (lambda.imag() == 0.0) {
        Mat basis = nullspace_basis(mre, 1e-9);
        std::vector<std::vector<Complex>> out;
        for (std::size_t j = 0; j < basis.cols(); ++j) {
            std::vector<Complex> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = basis(i, j);
            out.push_back(std::move(col));
        }
        return out;
    }
    Mat dbl(2 * rows, 2 * n);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            dbl(i, j) = mre(i, j);
            dbl(i, n + j) = -mim(i, j);
            dbl(rows + i, j) = mim(i, j);
            dbl(rows + i, n + j) = mre(i, j);
        }
    Mat basis = nullspace_basis(dbl, 1e-9);
    // complex Gram-Schmidt over the doubled-real null vectors
    std::vector<std::vector<Complex>> out;
    for (std::size_t j = 0; j < basis.cols(); ++j) {
        std::vector<Complex> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = Complex(basis(i, j), basis(n + i, j));
        for (const auto& u : out) {
            Complex dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += std::conj(u[i]) * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= dot * u[i];
        }
        double nrm = 0.0;
        for (const Complex& x : v) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm > 1e-8) {
            for (Complex& x : v) x /= nrm;
            out.push_back(std::move(v));
        }
    }
    return out;
}

double cond_estimate(const Mat& x) {
    const std::size_t n = x.rows();
    double n1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(x(i, j));
        n1 = std::max(n1, s);
    }
    Mat inv;
    try {
        inv = solve_linear(x, Mat::identity(n));
    } catch (const Singular&) {
        return std::numeric_limits<double>::infinity();
    }
    double n2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(inv(i, j));
        n2 = std::max(n2, s);
    }
    return n1 * n2;
}

// orthonormal basis of the complement of span(Y) via full QR
Mat complement_basis(const Mat& y, std::size_t want) {
    const std::size_t n = y.rows();
    if (y.cols() == 0) {
        Mat out(n, want);
        for (std::size_t j = 0; j < want && j < n; ++j) out(j, j) = 1.0;
        return out;
    }
    QrResult f = qr_decompose(y);
    Mat out(n, want);
    for (std::size_t j = 0; j < want; ++j)
        for (std::size_t i = 0; i < n; ++i) out(i, j) = f.q(i, n - want + j);
    return out;
}

} // namespace

std::vector<double> pair_relative_errors(const std::vector<Complex>& targets,
                                         std::vector<Complex> achieved) {
    double scale = 0.0;
    for (const Complex& t : targets) scale = std::max(scale, std::abs(t));
    if (scale == 0.0) scale = 1.0;

    std::vector<double> errs;
    std::vector<Complex> pool = std::move(achieved);
    std::vector<bool> t_used(targets.size(), false), p_used(pool.size(), false);
    const std::size_t count = std::min(targets.size(), pool.size());
    for (std::size_t step = 0; step < count; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (t_used[i]) continue;
            for (std::size_t j = 0; j < pool.size(); ++j) {
                if (p_used[j]) continue;
                const double d = std::abs(targets[i] - pool[j]);
                if (d < best) { best = d; bi = i; bj = j; }
            }
        }
        t_used[bi] = true;
        p_used[bj] = true;
        const double denom = std::abs(targets[bi]) > 1e-9 * scale ? std::abs(targets[bi]) : scale;
        errs.push_back(best / denom);
    }
    return errs;
}

PlacementResult place_poles(const Mat& a, const Mat& b, std::vector<Complex> targets) {
    if (!a.is_square() || a.empty()) throw DimensionMismatch("place_poles: a must be square");
    const std::size_t n = a.rows();
    if (b.rows() != n || b.cols() == 0) throw DimensionMismatch("place_poles: b must be n x m");
    const std::size_t m = b.cols();
    if (targets.size() != n)
        throw TargetCountMismatch("place_poles: expected " + std::to_string(n) + " targets, got " +
                                  std::to_string(targets.size()));

    // b = [U0 U1] [Z; 0]
    QrResult bqr = qr_decompose(b);
    Mat z(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) z(i, j) = bqr.r(i, j);
    {
        const double zmax = z.max_abs();
        for (std::size_t i = 0; i < m; ++i)
            if (std::abs(z(i, i)) < 1e-12 * std::max(zmax, 1.0))
                throw Uncontrollable("place_poles: input matrix is rank deficient");
    }
    Mat u0(n, m), u1t(n - m, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) u0(i, j) = bqr.q(i, j);
    for (std::size_t i = 0; i < n - m; ++i)
        for (std::size_t j = 0; j < n; ++j) u1t(i, j) = bqr.q(j, m + i);

    // PBH test at the open-loop spectrum: an immovable mode must be retained
    {
        const std::vector<Complex> open = eig_qr(a);
        for (const Complex& mu : open) {
            Mat pbh_re(n, n + m), pbh_im(n, n + m);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    pbh_re(i, j) = a(i, j) - (i == j ? mu.real() : 0.0);
                    pbh_im(i, j) = (i == j ? -mu.imag() : 0.0);
                }
                for (std::size_t j = 0; j < m; ++j) pbh_re(i, n + j) = b(i, j);
            }
            std::size_t rank;
            if (mu.imag() == 0.0) {
                rank = rank_from_pivoted(qr_col_pivot(pbh_re), 1e-10);
                if (rank == n) continue;
            } else {
                Mat dbl(2 * n, 2 * (n + m));
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n + m; ++j) {
                        dbl(i, j) = pbh_re(i, j);
                        dbl(i, n + m + j) = -pbh_im(i, j);
                        dbl(n + i, j) = pbh_im(i, j);
                        dbl(n + i, n + m + j) = pbh_re(i, j);
                    }
                rank = rank_from_pivoted(qr_col_pivot(dbl), 1e-10);
                if (rank == 2 * n) continue;
            }
            bool retained = false;
            for (const Complex& t : targets)
                if (std::abs(t - mu) <= 1e-6 * std::max(1.0, std::abs(mu))) retained = true;
            if (!retained)
                throw Uncontrollable("place_poles: mode " + std::to_string(mu.real()) +
                                     (mu.imag() >= 0 ? "+" : "") + std::to_string(mu.imag()) +
                                     "j is uncontrollable and not retained by the targets");
        }
    }

    const std::vector<TargetGroup> groups = group_targets(targets);

    // admissible subspaces per group
    struct Subspace {
        bool complex_pair;
        Complex lambda;
        Mat real_basis;                             // real case: n x k
        std::vector<std::vector<Complex>> cx_basis; // complex case
        std::size_t col0;                           // first column in X
    };
    std::vector<Subspace> subs;
    {
        std::size_t col = 0;
        for (const auto& g : groups) {
            Subspace s;
            s.complex_pair = g.complex_pair;
            s.lambda = g.lambda;
            s.col0 = col;
            if (m == n) {
                // unconstrained: the whole space is admissible
                if (!g.complex_pair) s.real_basis = Mat::identity(n);
                else {
                    for (std::size_t j = 0; j < n; ++j) {
                        std::vector<Complex> e(n, 0.0);
                        e[j] = 1.0;
                        s.cx_basis.push_back(std::move(e));
                    }
                }
            } else if (!g.complex_pair) {
                Mat mm(n - m, n);
                for (std::size_t i = 0; i < n - m; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k < n; ++k) acc += u1t(i, k) * a(k, j);
                        mm(i, j) = acc - g.lambda.real() * u1t(i, j);
                    }
                s.real_basis = nullspace_basis(mm, 1e-9);
                if (s.real_basis.cols() == 0)
                    throw Uncontrollable("place_poles: empty admissible subspace at target " +
                                         std::to_string(g.lambda.real()));
            } else {
                s.cx_basis = complex_nullspace(u1t, a, g.lambda);
                if (s.cx_basis.empty())
                    throw Uncontrollable("place_poles: empty admissible subspace at target " +
                                         std::to_string(g.lambda.real()));
            }
            col += g.complex_pair ? 2 : 1;
            subs.push_back(std::move(s));
        }
    }

    // seed X, cycling through basis columns (indexed by the target column so
    // repeated targets and adjacent pair halves stay independent)
    Mat x(n, n);
    for (const auto& s : subs) {
        if (!s.complex_pair) {
            const std::size_t k = s.real_basis.cols();
            const std::size_t pick = s.col0 % k;
            for (std::size_t i = 0; i < n; ++i) x(i, s.col0) = s.real_basis(i, pick);
        } else {
            const std::size_t k = s.cx_basis.size();
            std::vector<Complex> v = s.cx_basis[s.col0 % k];
            double nr = 0.0, ni = 0.0;
            for (const Complex& c2 : v) { nr += c2.real() * c2.real(); ni += c2.imag() * c2.imag(); }
            if (ni <= 1e-12 * nr && k >= 2) {
                // mix in a second basis direction: a real-only vector cannot
                // carry two independent columns for the conjugate pair
                const auto& w = s.cx_basis[(s.col0 + 1) % k];
                for (std::size_t i = 0; i < n; ++i) v[i] += Complex(0.0, 1.0) * w[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                x(i, s.col0) = v[i].real();
                x(i, s.col0 + 1) = v[i].imag();
            }
        }
    }

    // conditioning-driven exchange sweeps: each group is re-picked to carry
    // the most orthogonal content against the span of the others; the best
    // pack seen wins
    double cond_prev = cond_estimate(x);
    Mat x_best = x;
    double cond_best = cond_prev;
    for (int pass = 0; pass < 20; ++pass) {
        for (const auto& s : subs) {
            const std::size_t width = s.complex_pair ? 2 : 1;
            Mat y(n, n - width);
            {
                std::size_t c = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j >= s.col0 && j < s.col0 + width) continue;
                    for (std::size_t i = 0; i < n; ++i) y(i, c) = x(i, j);
                    ++c;
                }
            }
            Mat qc = complement_basis(y, width);
            if (!s.complex_pair) {
                // project the complement direction onto the subspace
                const Mat& bs = s.real_basis;
                const std::size_t k = bs.cols();
                std::vector<double> coef(k, 0.0);
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t i = 0; i < n; ++i) coef[j] += bs(i, j) * qc(i, 0);
                double nrm = 0.0;
                std::vector<double> cand(n, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < k; ++j) acc += bs(i, j) * coef[j];
                    cand[i] = acc;
                    nrm += acc * acc;
                }
                nrm = std::sqrt(nrm);
                if (nrm > 1e-10)
                    for (std::size_t i = 0; i < n; ++i) x(i, s.col0) = cand[i] / nrm;
            } else {
                // dominant direction of B^H P B over the complex coefficients
                const std::size_t k = s.cx_basis.size();
                std::vector<std::vector<Complex>> pb(k, std::vector<Complex>(2, 0.0));
                for (std::size_t j = 0; j < k; ++j)
                    for (int c2 = 0; c2 < 2; ++c2) {
                        Complex acc = 0.0;
                        for (std::size_t i = 0; i < n; ++i)
                            acc += std::conj(s.cx_basis[j][i]) * qc(i, c2);
                        pb[j][c2] = acc;
                    }
                std::vector<Complex> coef(k, Complex(1.0, 0.0));
                for (int it = 0; it < 60; ++it) {
                    std::vector<Complex> nxt(k, 0.0);
                    // G c = B^H P B c with P = sum qc qc^T
                    for (int c2 = 0; c2 < 2; ++c2) {
                        Complex w = 0.0;
                        for (std::size_t j = 0; j < k; ++j) w += std::conj(pb[j][c2]) * coef[j];
                        for (std::size_t j = 0; j < k; ++j) nxt[j] += pb[j][c2] * w;
                    }
                    double nrm = 0.0;
                    for (const Complex& v : nxt) nrm += std::norm(v);
                    nrm = std::sqrt(nrm);
                    if (nrm < 1e-14) break;
                    for (Complex& v : nxt) v /= nrm;
                    coef = std::move(nxt);
                }
                std::vector<Complex> cand(n, 0.0);
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t i = 0; i < n; ++i) cand[i] += coef[j] * s.cx_basis[j][i];
                double nrm = 0.0;
                for (const Complex& v : cand) nrm += std::norm(v);
                nrm = std::sqrt(nrm / 2.0);
                if (nrm > 1e-10) {
                    for (std::size_t i = 0; i < n; ++i) {
                        x(i, s.col0) = cand[i].real() / nrm;
                        x(i, s.col0 + 1) = cand[i].imag() / nrm;
                    }
                }
            }
        }
        const double cond_now = cond_estimate(x);
        if (cond_now < cond_best) {
            cond_best = cond_now;
            x_best = x;
        }
        if (std::isfinite(cond_prev) && cond_now > 0.99 * cond_prev) break;
        cond_prev = cond_now;
    }
    x = x_best;
    if (!std::isfinite(cond_best) || cond_best > 1e12)
        throw IllConditioned("place_poles: eigenvector pack condition " + std::to_string(cond_best));

    // Lambda in real block form
    Mat lam(n, n);
    for (const auto& s : subs) {
        if (!s.complex_pair) lam(s.col0, s.col0) = s.lambda.real();
        else {
            lam(s.col0, s.col0) = s.lambda.real();
            lam(s.col0, s.col0 + 1) = s.lambda.imag();
            lam(s.col0 + 1, s.col0) = -s.lambda.imag();
            lam(s.col0 + 1, s.col0 + 1) = s.lambda.real();
        }
    }

    // F = Z^-1 U0^T (X Lam X^-1 - A)
    Mat xl = x * lam;
    Mat w;
    try {
        w = solve_linear(x.transpose(), xl.transpose()).transpose();
    } catch (const Singular&) {
        throw IllConditioned("place_poles: eigenvector pack is singular");
    }
    Mat rhs = u0.transpose() * (w - a);
    Mat f = solve_linear(z, rhs);

    PlacementResult res;
    res.f = f;
    res.targets = targets;
    res.achieved = eig_qr(a + b * f);
    res.conditioning = cond_best;
    const std::vector<double> errs = pair_relative_errors(targets, res.achieved);
    res.max_rel_error = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
    if (n > m) {
        Mat resid = u1t * (a * x - xl);
        res.theorem_residual = resid.max_abs();
    }
    return res;
}

std::vector<Complex> propose_targets(const EigenReport& report, double zeta_min) {
    if (!(zeta_min > 0.0 && zeta_min < 1.0))
        throw InvalidSpec("propose_targets: zeta_min must lie in (0, 1)");
    std::vector<Complex> out;
    out.reserve(report.entries.size());
    for (const EigenEntry& e : report.entries) {
        Complex l = e.lambda;
        if (std::abs(l) < 1e-6) {
            // angle-redundancy mode: re-anchor at unit decay
            out.emplace_back(-1.0, 0.0);
            continue;
        }
        if (l.real() >= 0.0) {
            const double floor = 0.05 * std::abs(l);
            l = Complex(-std::max(std::abs(l.real()), floor), l.imag());
        }
        const double mag = std::abs(l);
        const double damping = l.imag() == 0.0 ? (l.real() < 0.0 ? 1.0 : -1.0) : -l.real() / mag;
        if (damping < zeta_min) {
            const double im = mag * std::sqrt(1.0 - zeta_min * zeta_min);
            l = Complex(-zeta_min * mag, l.imag() >= 0.0 ? im : -im);
        }
        out.push_back(l);
    }
    return out;
}

PlacementCheck verify_placement(const Mat& a, const Mat& b, const Mat& f,
                                const std::vector<Complex>& targets) {
    if (!a.is_square()) throw DimensionMismatch("verify_placement: a must be square");
    if (b.rows() != a.rows()) throw DimensionMismatch("verify_placement: b row mismatch");
    if (f.rows() != b.cols() || f.cols() != a.rows())
        throw DimensionMismatch("verify_placement: f must be m x n");

    PlacementCheck out;
    out.achieved = eig_qr(a + b * f);
    const std::vector<double> errs = pair_relative_errors(targets, out.achieved);
    out.max_rel_error = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
    out.pass_10pct = out.max_rel_error <= 0.10;
    out.pass_tight = out.max_rel_error <= 1e-6;
    return out;
}

} // namespace hmg
