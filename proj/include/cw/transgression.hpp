#pragma once

#include "cw/invariant.hpp"
#include "cw/pushforward.hpp"

namespace cw {

/// Gauss-Legendre rule on (0,1); half-line families are reached through the
/// compactification s = u/(1-u) with its Jacobian.
struct QuadratureSpec {
    int nodes = 48;

    /// Nodes and weights on (0,1), strictly interior, positive weights.
    void rule(std::vector<double>& x, std::vector<double>& w) const;
};

/// Transgression of an invariant polynomial over a connection family:
/// per-chart forms of degree 2 deg(phi) - 1, with provenance metadata.
struct TransgressionField {
    std::vector<DifferentialForm> forms;
    std::string phi_name;
    int quadrature_nodes = 0;
    // orientation: the family parameter increases from the pushforward end
    // toward the target connection, and the identity d T = phi(F-end) -
    // phi(pushforward end) fixes the sign
    std::string orientation = "increasing_s";
};

/// T = integral over the family of polarize(phi, d omega_s / ds, Omega_s).
TransgressionField transgress(const ConnectionFamily& fam, const InvariantPolynomial& phi,
                              const QuadratureSpec& quad);

/// Residual of the transgression identity phi(end) - phi(start) - dT,
/// reported off a mask (sup norm per chart and overall).
struct IdentityResidual {
    double sup = 0.0;
    std::vector<double> per_chart;
};
IdentityResidual check_transgression_identity(const TransgressionField& T,
                                              const std::vector<DifferentialForm>& phi_end,
                                              const std::vector<DifferentialForm>& phi_start,
                                              const std::vector<std::vector<uint8_t>>& keep);

/// Two-parameter family for the double transgression: s in [0,1] indexes the
/// homotopy, t the transgression parameter.
class TwoParamFamily {
public:
    TwoParamFamily(BundlePtr bundle,
                   std::function<std::vector<MatrixForm>(double s, double t)> omega,
                   std::function<std::vector<MatrixForm>(double, double)> omega_ds,
                   std::function<std::vector<MatrixForm>(double, double)> omega_dt,
                   ConnectionFamily::Domain domain, double a, double b);

    const BundlePtr& bundle() const { return bundle_; }
    std::vector<MatrixForm> omega(double s, double t) const { return omega_(s, t); }
    std::vector<MatrixForm> omega_ds(double s, double t) const { return omega_ds_(s, t); }
    std::vector<MatrixForm> omega_dt(double s, double t) const { return omega_dt_(s, t); }
    ConnectionFamily::Domain domain() const { return domain_; }
    double a() const { return a_; }
    double b() const { return b_; }

    ConnectionFamily slice(double s) const;

    /// Max drift of the endpoint connections across the s range.
    double endpoint_drift(int probes = 5) const;

private:
    BundlePtr bundle_;
    std::function<std::vector<MatrixForm>(double, double)> omega_, omega_ds_, omega_dt_;
    ConnectionFamily::Domain domain_;
    double a_, b_;
};

/// R with T_1 - T_0 = dR for fixed-endpoint families: tensor-product
/// quadrature of the double polarization over (s, t). Degree 2 deg(phi) - 2.
/// Throws when the endpoints drift beyond 1e-8.
std::vector<DifferentialForm> double_transgress(const TwoParamFamily& fam,
                                                const InvariantPolynomial& phi,
                                                const QuadratureSpec& quad);

} // namespace cw
