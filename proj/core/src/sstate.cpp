#include "hmg/sstate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace hmg {

namespace {

void check_unique(const std::vector<std::string>& labels, const char* kind) {
    std::set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw DuplicateLabel(std::string(kind) + " label '" + l + "' repeated");
}

} // namespace

void validate_lti(const Lti& m) {
    const std::size_t n = m.state_names.size();
    const std::size_t nin = m.input_names.size();
    const std::size_t nout = m.output_names.size();
    if (m.a.rows() != n || m.a.cols() != n)
        throw DimensionMismatch("lti: a must be n x n");
    if (m.b.rows() != n || m.b.cols() != nin)
        throw DimensionMismatch("lti: b must be n x m");
    if (m.c.rows() != nout || m.c.cols() != n)
        throw DimensionMismatch("lti: c must be p x n");
    if (m.d.rows() != nout || m.d.cols() != nin)
        throw DimensionMismatch("lti: d must be p x m");
    check_unique(m.state_names, "state");
    check_unique(m.input_names, "input");
    check_unique(m.output_names, "output");
}

Lti make_lti(Mat a, Mat b, Mat c, Mat d,
             std::vector<std::string> states,
             std::vector<std::string> inputs,
             std::vector<std::string> outputs) {
    Lti m{std::move(a), std::move(b), std::move(c), std::move(d),
          std::move(states), std::move(inputs), std::move(outputs)};
    validate_lti(m);
    return m;
}

Lti make_lti(Mat a, Mat b, std::vector<std::string> states, std::vector<std::string> inputs) {
    const std::size_t n = states.size();
    Mat c = Mat::identity(n);
    Mat d(n, inputs.size());
    std::vector<std::string> outputs = states;
    return make_lti(std::move(a), std::move(b), std::move(c), std::move(d),
                    std::move(states), std::move(inputs), std::move(outputs));
}

// ---------------------------------------------------------------------------
// Interconnection
// ---------------------------------------------------------------------------

Lti interconnect(const std::vector<NamedBlock>& blocks,
                 const std::vector<Wire>& wires,
                 const std::vector<std::string>& external_inputs,
                 const std::vector<std::string>& external_outputs) {
    std::size_t n = 0, nu = 0, ny = 0;
    for (const auto& blk : blocks) {
        validate_lti(blk.sys);
        n += blk.sys.n();
        nu += blk.sys.m();
        ny += blk.sys.p();
    }

    // stacked block-diagonal system with qualified labels
    Mat A(n, n), B(n, nu), C(ny, n), D(ny, nu);
    std::vector<std::string> states, ins, outs;
    states.reserve(n); ins.reserve(nu); outs.reserve(ny);
    {
        std::size_t i0 = 0, u0 = 0, y0 = 0;
        std::set<std::string> blocknames;
        for (const auto& blk : blocks) {
            if (!blocknames.insert(blk.name).second)
                throw DuplicateLabel("block name '" + blk.name + "' repeated");
            const Lti& s = blk.sys;
            for (std::size_t i = 0; i < s.n(); ++i)
                for (std::size_t j = 0; j < s.n(); ++j) A(i0 + i, i0 + j) = s.a(i, j);
            for (std::size_t i = 0; i < s.n(); ++i)
                for (std::size_t j = 0; j < s.m(); ++j) B(i0 + i, u0 + j) = s.b(i, j);
            for (std::size_t i = 0; i < s.p(); ++i)
                for (std::size_t j = 0; j < s.n(); ++j) C(y0 + i, i0 + j) = s.c(i, j);
            for (std::size_t i = 0; i < s.p(); ++i)
                for (std::size_t j = 0; j < s.m(); ++j) D(y0 + i, u0 + j) = s.d(i, j);
            for (const auto& l : s.state_names) states.push_back(blk.name + "." + l);
            for (const auto& l : s.input_names) ins.push_back(blk.name + "." + l);
            for (const auto& l : s.output_names) outs.push_back(blk.name + "." + l);
            i0 += s.n(); u0 += s.m(); y0 += s.p();
        }
    }

    std::unordered_map<std::string, std::size_t> uidx, yidx;
    for (std::size_t i = 0; i < ins.size(); ++i) uidx[ins[i]] = i;
    for (std::size_t i = 0; i < outs.size(); ++i) yidx[outs[i]] = i;

    Mat W(nu, ny);
    std::vector<bool> wired(nu, false);
    for (const auto& w : wires) {
        auto fy = yidx.find(w.from);
        if (fy == yidx.end()) throw UnknownLabel("wire source '" + w.from + "' not an output");
        auto tu = uidx.find(w.to);
        if (tu == uidx.end()) throw UnknownLabel("wire destination '" + w.to + "' not an input");
        W(tu->second, fy->second) += w.gain;
        wired[tu->second] = true;
    }

    std::vector<std::size_t> ext_in;
    if (external_inputs.empty()) {
        for (std::size_t i = 0; i < nu; ++i)
            if (!wired[i]) ext_in.push_back(i);
    } else {
        for (const auto& l : external_inputs) {
            auto it = uidx.find(l);
            if (it == uidx.end()) throw UnknownLabel("external input '" + l + "' not an input");
            ext_in.push_back(it->second);
        }
    }
    std::vector<std::size_t> ext_out;
    if (external_outputs.empty()) {
        for (std::size_t i = 0; i < ny; ++i) ext_out.push_back(i);
    } else {
        for (const auto& l : external_outputs) {
            auto it = yidx.find(l);
            if (it == yidx.end()) throw UnknownLabel("external output '" + l + "' not an output");
            ext_out.push_back(it->second);
        }
    }
    const std::size_t me = ext_in.size(), pe = ext_out.size();

    Mat E(nu, me);
    for (std::size_t j = 0; j < me; ++j) E(ext_in[j], j) = 1.0;

    // y = C x + D (W y + E u)  =>  (I - D W) y = C x + D E u
    Mat loop = Mat::identity(ny) - D * W;
    Mat cs, ds;
    {
        Mat rhs(ny, n + me);
        Mat de = D * E;
        for (std::size_t i = 0; i < ny; ++i) {
            for (std::size_t j = 0; j < n; ++j) rhs(i, j) = C(i, j);
            for (std::size_t j = 0; j < me; ++j) rhs(i, n + j) = de(i, j);
        }
        Mat sol;
        try {
            sol = solve_linear(loop, rhs);
        } catch (const Singular&) {
            throw SingularAlgebraicLoop("interconnect: algebraic loop matrix I - D W is singular");
        }
        cs = Mat(ny, n);
        ds = Mat(ny, me);
        for (std::size_t i = 0; i < ny; ++i) {
            for (std::size_t j = 0; j < n; ++j) cs(i, j) = sol(i, j);
            for (std::size_t j = 0; j < me; ++j) ds(i, j) = sol(i, n + j);
        }
    }

    Mat BW = B * W;
    Mat Acl = A + BW * cs;
    Mat Bcl = B * E + BW * ds;
    Mat Ccl(pe, n), Dcl(pe, me);
    for (std::size_t i = 0; i < pe; ++i) {
        for (std::size_t j = 0; j < n; ++j) Ccl(i, j) = cs(ext_out[i], j);
        for (std::size_t j = 0; j < me; ++j) Dcl(i, j) = ds(ext_out[i], j);
    }

    std::vector<std::string> in_labels, out_labels;
    for (std::size_t i : ext_in) in_labels.push_back(ins[i]);
    for (std::size_t i : ext_out) out_labels.push_back(outs[i]);
    return make_lti(std::move(Acl), std::move(Bcl), std::move(Ccl), std::move(Dcl),
                    std::move(states), std::move(in_labels), std::move(out_labels));
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

std::vector<Complex> poles(const Lti& m) { return eig_qr(m.a); }

namespace {

std::size_t find_label(const std::vector<std::string>& labels, const std::string& l, const char* kind) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw UnknownLabel(std::string(kind) + " '" + l + "' not found");
    return static_cast<std::size_t>(it - labels.begin());
}

} // namespace

std::vector<Complex> zeros_siso(const Lti& m, const std::string& input, const std::string& output) {
    validate_lti(m);
    const std::size_t j = find_label(m.input_names, input, "input");
    const std::size_t i = find_label(m.output_names, output, "output");
    const std::size_t n = m.n();

    CharPolyResult cp = char_poly(m.a); // throws SizeLimit beyond n = 60

    // numerator N(s) = c_i adj(sI - a) b_j + d_ij det(sI - a), degree <= n
    std::vector<double> num(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Mat& mk = cp.adj_coeffs[k]; // coefficient of s^(n-1-k)
        double v = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (m.c(i, r) == 0.0) continue;
            double acc = 0.0;
            for (std::size_t q = 0; q < n; ++q) acc += mk(r, q) * m.b(q, j);
            v += m.c(i, r) * acc;
        }
        num[k + 1] += v;
    }
    const double dij = m.d(i, j);
    if (dij != 0.0)
        for (std::size_t k = 0; k <= n; ++k) num[k] += dij * cp.p.coeffs[k];

    double scale = 0.0;
    for (double v : num) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw ZeroNumerator("zeros_siso: channel is identically zero");

    // drop leading coefficients that are numerically zero relative to the rest
    std::size_t first = 0;
    while (first < num.size() && std::abs(num[first]) <= 1e-12 * scale) ++first;
    if (first == num.size()) throw ZeroNumerator("zeros_siso: channel is identically zero");
    Poly numerator;
    numerator.coeffs.assign(num.begin() + first, num.end());
    if (numerator.degree() == 0) return {};
    return companion_roots(numerator);
}

StepTrace step_response(const Lti& m, const std::string& input, double t_final,
                        double dt, std::vector<double> x0, double amplitude) {
    validate_lti(m);
    const std::size_t n = m.n(), p = m.p();
    const std::size_t j = find_label(m.input_names, input, "input");
    if (x0.empty()) x0.assign(n, 0.0);
    if (x0.size() != n) throw DimensionMismatch("step_response: x0 length mismatch");
    if (t_final <= 0.0) throw DimensionMismatch("step_response: t_final must be positive");

    if (dt <= 0.0) {
        double wmax = 0.0;
        for (const Complex& l : eig_qr(m.a)) wmax = std::max(wmax, std::abs(l));
        dt = t_final / 1000.0;
        if (wmax > 0.0) dt = std::min(dt, 0.1 / wmax);
    }
    if (t_final < dt) throw DimensionMismatch("step_response: t_final < dt");

    // [Phi Gamma; 0 1] = expm([[A b_j; 0 0]] dt)
    Mat aug(n + 1, n + 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t q = 0; q < n; ++q) aug(r, q) = m.a(r, q);
        aug(r, n) = m.b(r, j);
    }
    Mat e = expm_scaled(aug, dt);

    const std::size_t steps = static_cast<std::size_t>(std::floor(t_final / dt + 1e-9)) + 1;
    StepTrace tr;
    tr.times.reserve(steps);
    tr.states.reserve(steps);
    tr.outputs.reserve(steps);

    std::vector<double> x = x0, xn(n);
    for (std::size_t k = 0; k < steps; ++k) {
        tr.times.push_back(static_cast<double>(k) * dt);
        tr.states.push_back(x);
        std::vector<double> y(p, 0.0);
        for (std::size_t i = 0; i < p; ++i) {
            double acc = m.d(i, j) * amplitude;
            for (std::size_t q = 0; q < n; ++q) acc += m.c(i, q) * x[q];
            y[i] = acc;
        }
        tr.outputs.push_back(std::move(y));
        for (double v : x)
            if (!std::isfinite(v)) throw Overflow("step_response: state trajectory left the float range");

        for (std::size_t r = 0; r < n; ++r) {
            double acc = e(r, n) * amplitude;
            for (std::size_t q = 0; q < n; ++q) acc += e(r, q) * x[q];
            xn[r] = acc;
        }
        x = xn;
    }
    return tr;
}

Mat dc_gain(const Lti& m) {
    validate_lti(m);
    Mat x = solve_linear(m.a, m.b); // throws Singular for integrating systems
    return m.d - m.c * x;
}

} // namespace hmg
