#pragma once

#include "cw/matrix_form.hpp"

namespace cw {

/// Ad-invariant polynomial in the power sums s_j(X) = tr(X^j), with the
/// normalization prefactor folded into the coefficients. Homogeneous:
/// every monomial has total weight sum(j * mult_j) equal to `degree`.
class InvariantPolynomial {
public:
    struct Monomial {
        cplx coeff;
        std::vector<int> exps; // exps[j-1] = multiplicity of s_j
    };

    InvariantPolynomial(std::string name, int degree, std::vector<Monomial> monomials);

    const std::string& name() const { return name_; }
    int degree() const { return degree_; }
    const std::vector<Monomial>& monomials() const { return monomials_; }
    bool is_zero() const { return monomials_.empty(); }

    /// Numeric evaluation on a constant matrix (testing hook).
    cplx eval_numeric(const std::vector<cplx>& power_traces) const;

private:
    std::string name_;
    int degree_;
    std::vector<Monomial> monomials_;
};

/// k-th Chern polynomial of a rank-r complex bundle, (i/2pi)^k e_k via
/// Newton's identities. k > r yields the flagged zero polynomial.
InvariantPolynomial make_chern(int k, int r);

/// k-th Pontryagin polynomial of a rank-r real bundle, routed through the
/// complexified curvature: (-1)^k c_{2k}.
InvariantPolynomial make_pontryagin(int k, int r);

/// Chern character components ch_0..ch_max, ch_j = (i/2pi)^j s_j / j!.
std::vector<InvariantPolynomial> make_chern_character(int max_degree, int r);

/// First Hirzebruch term p_1 / 3.
InvariantPolynomial make_L1(int r);

/// Bare power sum s_j (testing convenience, no normalization).
InvariantPolynomial make_power_sum(int j);

/// phi evaluated on a degree-2 curvature matrix. Degrees above the chart
/// dimension return the flagged identically-zero form.
DifferentialForm evaluate(const InvariantPolynomial& phi, const MatrixForm& omega2);

/// Coefficient of s in phi(C + s A), by literal truncated expansion.
/// A has odd degree (typically 1), C the curvature degree 2.
DifferentialForm polarize(const InvariantPolynomial& phi, const MatrixForm& A, const MatrixForm& C);

/// Coefficient of s*t in phi(C + s A + t B).
DifferentialForm double_polarize(const InvariantPolynomial& phi, const MatrixForm& A,
                                 const MatrixForm& B, const MatrixForm& C);

} // namespace cw
