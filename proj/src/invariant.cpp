#include "cw/invariant.hpp"

#include <cmath>
#include <map>

namespace cw {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

using MonoMap = std::map<std::vector<int>, cplx>; // exps -> coeff

void add_mono(MonoMap& m, std::vector<int> exps, cplx c) {
    while (!exps.empty() && exps.back() == 0) exps.pop_back();
    m[std::move(exps)] += c;
}

MonoMap mono_mul(const MonoMap& a, const MonoMap& b) {
    MonoMap out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::vector<int> e(std::max(ea.size(), eb.size()), 0);
            for (std::size_t i = 0; i < ea.size(); ++i) e[i] += ea[i];
            for (std::size_t i = 0; i < eb.size(); ++i) e[i] += eb[i];
            add_mono(out, std::move(e), ca * cb);
        }
    return out;
}

std::vector<InvariantPolynomial::Monomial> to_monomials(const MonoMap& m, double drop = 1e-15) {
    std::vector<InvariantPolynomial::Monomial> out;
    for (const auto& [e, c] : m)
        if (std::abs(c) > drop) out.push_back({c, e});
    return out;
}

/// Elementary symmetric e_k in power sums via Newton's identities.
MonoMap elementary_in_power_sums(int k) {
    std::vector<MonoMap> e(k + 1);
    e[0][{}] = cplx(1.0);
    for (int m = 1; m <= k; ++m) {
        MonoMap acc;
        double sign = 1.0;
        for (int j = 1; j <= m; ++j) {
            MonoMap sj;
            std::vector<int> exps(j, 0);
            exps[j - 1] = 1;
            sj[exps] = cplx(sign);
            for (const auto& [ee, cc] : mono_mul(e[m - j], sj)) acc[ee] += cc;
            sign = -sign;
        }
        for (auto& [ee, cc] : acc) cc /= static_cast<double>(m);
        e[m] = std::move(acc);
    }
    return e[k];
}

/// Non-throwing wedge for the expansion engine: degree overflow becomes the
/// flagged zero form.
DifferentialForm wedge_soft(const DifferentialForm& a, const DifferentialForm& b) {
    const int deg = a.degree() + b.degree();
    if (a.overflow() || b.overflow() || deg > a.chart()->dim())
        return DifferentialForm::zero_overflow(a.chart(), deg);
    return wedge(a, b);
}

MatrixForm matrix_wedge_soft(const MatrixForm& A, const MatrixForm& B) {
    return matrix_wedge(A, B); // matrix_wedge already yields overflow entries
}

/// Truncated polynomial in two formal scalars s, t (each power <= 1) with
/// form coefficients of staggered degrees.
struct FormPoly {
    DifferentialForm c00, c10, c01, c11; // 1, s, t, st
};
struct MatrixPoly {
    const MatrixForm *m00, *m10, *m01; // borrowed base terms (no st term in inputs)
};

FormPoly poly_mul(const FormPoly& a, const FormPoly& b) {
    FormPoly out;
    out.c00 = wedge_soft(a.c00, b.c00);
    out.c10 = wedge_soft(a.c00, b.c10) + wedge_soft(a.c10, b.c00);
    out.c01 = wedge_soft(a.c00, b.c01) + wedge_soft(a.c01, b.c00);
    out.c11 = wedge_soft(a.c00, b.c11) + wedge_soft(a.c10, b.c01) +
              wedge_soft(a.c01, b.c10) + wedge_soft(a.c11, b.c00);
    return out;
}

struct MatrixPolyV {
    MatrixForm c00, c10, c01, c11;
    bool has10 = false, has01 = false, has11 = false;
};

MatrixPolyV poly_mul(const MatrixPolyV& a, const MatrixPolyV& b) {
    MatrixPolyV out;
    out.c00 = matrix_wedge_soft(a.c00, b.c00);
    // s terms
    if (a.has10 || b.has10) {
        out.has10 = true;
        bool first = true;
        if (b.has10) { out.c10 = matrix_wedge_soft(a.c00, b.c10); first = false; }
        if (a.has10) {
            MatrixForm t = matrix_wedge_soft(a.c10, b.c00);
            if (first) out.c10 = std::move(t);
            else out.c10 += t;
        }
    }
    if (a.has01 || b.has01) {
        out.has01 = true;
        bool first = true;
        if (b.has01) { out.c01 = matrix_wedge_soft(a.c00, b.c01); first = false; }
        if (a.has01) {
            MatrixForm t = matrix_wedge_soft(a.c01, b.c00);
            if (first) out.c01 = std::move(t);
            else out.c01 += t;
        }
    }
    // st terms
    {
        std::vector<MatrixForm> parts;
        if (b.has11) parts.push_back(matrix_wedge_soft(a.c00, b.c11));
        if (a.has10 && b.has01) parts.push_back(matrix_wedge_soft(a.c10, b.c01));
        if (a.has01 && b.has10) parts.push_back(matrix_wedge_soft(a.c01, b.c10));
        if (a.has11) parts.push_back(matrix_wedge_soft(a.c11, b.c00));
        if (!parts.empty()) {
            out.has11 = true;
            out.c11 = std::move(parts[0]);
            for (std::size_t i = 1; i < parts.size(); ++i) out.c11 += parts[i];
        }
    }
    return out;
}

FormPoly trace_poly(const MatrixPolyV& m, ChartPtr chart) {
    FormPoly out;
    out.c00 = matrix_trace(m.c00);
    out.c10 = m.has10 ? matrix_trace(m.c10)
                      : DifferentialForm::zero_overflow(chart, m.c00.degree() - 1);
    out.c01 = m.has01 ? matrix_trace(m.c01)
                      : DifferentialForm::zero_overflow(chart, m.c00.degree() - 1);
    out.c11 = m.has11 ? matrix_trace(m.c11)
                      : DifferentialForm::zero_overflow(chart, m.c00.degree() - 2);
    return out;
}

/// s_j(C + sA + tB) as a truncated polynomial.
FormPoly power_sum_poly(int j, const MatrixForm& C, const MatrixForm* A, const MatrixForm* B) {
    MatrixPolyV x;
    x.c00 = C;
    if (A) { x.c10 = *A; x.has10 = true; }
    if (B) { x.c01 = *B; x.has01 = true; }
    MatrixPolyV acc = x;
    for (int p = 1; p < j; ++p) acc = poly_mul(acc, x);
    return trace_poly(acc, C.chart());
}

DifferentialForm expand(const InvariantPolynomial& phi, const MatrixForm& C, const MatrixForm* A,
                        const MatrixForm* B, int pick /*0: value, 1: s, 2: st*/) {
    const ChartPtr& chart = C.chart();
    const int dim = chart->dim();
    const int target_deg = 2 * phi.degree() - (pick == 0 ? 0 : pick == 1 ? 1 : 2);
    if (phi.is_zero() || target_deg > dim || target_deg < 0)
        return DifferentialForm::zero_overflow(chart, std::max(target_deg, 0));

    // cache s_j polys per exponent position
    std::map<int, FormPoly> sj;
    auto get_sj = [&](int j) -> const FormPoly& {
        auto it = sj.find(j);
        if (it == sj.end()) it = sj.emplace(j, power_sum_poly(j, C, A, B)).first;
        return it->second;
    };

    DifferentialForm result(chart, target_deg);
    bool any = false;
    for (const auto& mono : phi.monomials()) {
        FormPoly acc;
        bool first = true;
        if (mono.exps.empty()) {
            // constant monomial: only contributes to the value slot
            if (pick == 0) {
                DifferentialForm cst(chart, 0);
                for (std::size_t n = 0; n < chart->node_count(); ++n) cst.at(0, n) = mono.coeff;
                if (target_deg == 0) {
                    result += cst;
                    any = true;
                }
            }
            continue;
        }
        for (int j = 1; j <= static_cast<int>(mono.exps.size()); ++j)
            for (int rep = 0; rep < mono.exps[j - 1]; ++rep) {
                if (first) {
                    acc = get_sj(j);
                    first = false;
                } else {
                    acc = poly_mul(acc, get_sj(j));
                }
            }
        const DifferentialForm* part = pick == 0 ? &acc.c00 : pick == 1 ? &acc.c10 : &acc.c11;
        if (part->overflow()) continue;
        DifferentialForm term = *part;
        term *= mono.coeff;
        result += term;
        any = true;
    }
    (void)any;
    return result;
}

} // namespace

InvariantPolynomial::InvariantPolynomial(std::string name, int degree,
                                         std::vector<Monomial> monomials)
    : name_(std::move(name)), degree_(degree), monomials_(std::move(monomials)) {
    for (const auto& m : monomials_) {
        int w = 0;
        for (std::size_t j = 0; j < m.exps.size(); ++j) w += static_cast<int>(j + 1) * m.exps[j];
        if (w != degree_)
            throw std::invalid_argument("invariant polynomial '" + name_ +
                                        "' is not homogeneous of the stated degree");
    }
}

cplx InvariantPolynomial::eval_numeric(const std::vector<cplx>& power_traces) const {
    cplx out(0.0);
    for (const auto& m : monomials_) {
        cplx term = m.coeff;
        for (std::size_t j = 0; j < m.exps.size(); ++j)
            for (int rep = 0; rep < m.exps[j]; ++rep) term *= power_traces.at(j);
        out += term;
    }
    return out;
}

InvariantPolynomial make_chern(int k, int r) {
    if (k == 0) return InvariantPolynomial("c0", 0, {{cplx(1.0), {}}});
    if (k > r) return InvariantPolynomial("c" + std::to_string(k) + "_zero", k, {});
    MonoMap e = elementary_in_power_sums(k);
    const cplx norm = std::pow(cplx(0.0, 1.0) / kTwoPi, k);
    for (auto& [ee, cc] : e) cc *= norm;
    return InvariantPolynomial("c" + std::to_string(k), k, to_monomials(e));
}

InvariantPolynomial make_pontryagin(int k, int r) {
    // (-1)^k c_{2k} of the complexified curvature; the complexification keeps
    // the same r x r matrix, so only the normalization changes
    if (2 * k > r) return InvariantPolynomial("p" + std::to_string(k) + "_zero", 2 * k, {});
    MonoMap e = elementary_in_power_sums(2 * k);
    const cplx norm = std::pow(cplx(0.0, 1.0) / kTwoPi, 2 * k) * std::pow(-1.0, k);
    for (auto& [ee, cc] : e) cc *= norm;
    return InvariantPolynomial("p" + std::to_string(k), 2 * k, to_monomials(e));
}

std::vector<InvariantPolynomial> make_chern_character(int max_degree, int r) {
    std::vector<InvariantPolynomial> out;
    out.emplace_back("ch0", 0,
                     std::vector<InvariantPolynomial::Monomial>{{cplx(static_cast<double>(r)), {}}});
    double fact = 1.0;
    for (int j = 1; j <= max_degree; ++j) {
        fact *= j;
        std::vector<int> exps(j, 0);
        exps[j - 1] = 1;
        const cplx c = std::pow(cplx(0.0, 1.0) / kTwoPi, j) / fact;
        out.emplace_back("ch" + std::to_string(j), j,
                         std::vector<InvariantPolynomial::Monomial>{{c, exps}});
    }
    return out;
}

InvariantPolynomial make_L1(int r) {
    InvariantPolynomial p1 = make_pontryagin(1, r);
    std::vector<InvariantPolynomial::Monomial> m = p1.monomials();
    for (auto& mono : m) mono.coeff /= 3.0;
    return InvariantPolynomial("L1", p1.degree(), std::move(m));
}

InvariantPolynomial make_power_sum(int j) {
    std::vector<int> exps(j, 0);
    exps[j - 1] = 1;
    return InvariantPolynomial("s" + std::to_string(j), j,
                               std::vector<InvariantPolynomial::Monomial>{{cplx(1.0), exps}});
}

DifferentialForm evaluate(const InvariantPolynomial& phi, const MatrixForm& omega2) {
    return expand(phi, omega2, nullptr, nullptr, 0);
}

DifferentialForm polarize(const InvariantPolynomial& phi, const MatrixForm& A,
                          const MatrixForm& C) {
    if (A.rows() != C.rows() || A.cols() != C.cols())
        throw std::invalid_argument("polarize: rank mismatch");
    return expand(phi, C, &A, nullptr, 1);
}

DifferentialForm double_polarize(const InvariantPolynomial& phi, const MatrixForm& A,
                                 const MatrixForm& B, const MatrixForm& C) {
    if (A.rows() != C.rows() || B.rows() != C.rows())
        throw std::invalid_argument("double_polarize: rank mismatch");
    return expand(phi, C, &A, &B, 2);
}

} // namespace cw
