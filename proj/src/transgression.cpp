#include "cw/transgression.hpp"

#include <cmath>

namespace cw {

void QuadratureSpec::rule(std::vector<double>& x, std::vector<double>& w) const {
    // Gauss-Legendre on (-1,1) by Newton iteration on Legendre roots,
    // mapped to (0,1)
    const int n = nodes;
    if (n < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

TransgressionField transgress(const ConnectionFamily& fam, const InvariantPolynomial& phi,
                              const QuadratureSpec& quad) {
    std::vector<double> xs, ws;
    quad.rule(xs, ws);

    TransgressionField T;
    T.phi_name = phi.name();
    T.quadrature_nodes = quad.nodes;

    const bool half_line = fam.domain() == ConnectionFamily::Domain::compactified_half_line;
    bool first = true;
    for (int k = 0; k < quad.nodes; ++k) {
        double s, jac;
        if (half_line) {
            const double u = xs[k];
            s = u / (1.0 - u);
            jac = 1.0 / ((1.0 - u) * (1.0 - u));
        } else {
            s = fam.a() + (fam.b() - fam.a()) * xs[k];
            jac = fam.b() - fam.a();
        }
        auto omega = fam.omega(s);
        auto omega_dot = fam.omega_dot(s);
        for (std::size_t ic = 0; ic < omega.size(); ++ic) {
            MatrixForm curv = curvature_of(omega[ic]);
            DifferentialForm term = polarize(phi, omega_dot[ic], curv);
            if (term.overflow()) {
                if (first) T.forms.push_back(term);
                continue;
            }
            term *= cplx(ws[k] * jac);
            if (first)
                T.forms.push_back(std::move(term));
            else
                T.forms[ic] += term;
        }
        first = false;
    }
    return T;
}

IdentityResidual check_transgression_identity(const TransgressionField& T,
                                              const std::vector<DifferentialForm>& phi_end,
                                              const std::vector<DifferentialForm>& phi_start,
                                              const std::vector<std::vector<uint8_t>>& keep) {
    IdentityResidual out;
    for (std::size_t ic = 0; ic < T.forms.size(); ++ic) {
        DifferentialForm resid = phi_end[ic];
        resid -= phi_start[ic];
        DifferentialForm dT = exterior_derivative(T.forms[ic]);
        resid -= dT;
        const double sup = resid.max_abs(keep.empty() ? nullptr : &keep[ic]);
        out.per_chart.push_back(sup);
        out.sup = std::max(out.sup, sup);
    }
    return out;
}

TwoParamFamily::TwoParamFamily(BundlePtr bundle,
                               std::function<std::vector<MatrixForm>(double, double)> omega,
                               std::function<std::vector<MatrixForm>(double, double)> omega_ds,
                               std::function<std::vector<MatrixForm>(double, double)> omega_dt,
                               ConnectionFamily::Domain domain, double a, double b)
    : bundle_(std::move(bundle)), omega_(std::move(omega)), omega_ds_(std::move(omega_ds)),
      omega_dt_(std::move(omega_dt)), domain_(domain), a_(a), b_(b) {}

ConnectionFamily TwoParamFamily::slice(double s) const {
    auto om = omega_;
    auto od = omega_dt_;
    return ConnectionFamily(
        bundle_, [om, s](double t) { return om(s, t); }, [od, s](double t) { return od(s, t); },
        domain_, a_, b_);
}

double TwoParamFamily::endpoint_drift(int probes) const {
    double drift = 0.0;
    const bool half_line = domain_ == ConnectionFamily::Domain::compactified_half_line;
    const double t_lo = half_line ? 1e-6 : a_;
    const double t_hi = half_line ? kSMax : b_;
    for (double t : {t_lo, t_hi}) {
        auto ref = omega_(0.0, t);
        for (int p = 1; p <= probes; ++p) {
            auto cur = omega_(static_cast<double>(p) / probes, t);
            for (std::size_t ic = 0; ic < ref.size(); ++ic) {
                MatrixForm d = cur[ic];
                d -= ref[ic];
                drift = std::max(drift, d.max_abs());
            }
        }
    }
    return drift;
}

std::vector<DifferentialForm> double_transgress(const TwoParamFamily& fam,
                                                const InvariantPolynomial& phi,
                                                const QuadratureSpec& quad) {
    const double drift = fam.endpoint_drift();
    if (drift > 1e-8)
        throw std::runtime_error("double transgression: endpoint connections drift by " +
                                 std::to_string(drift));

    std::vector<double> xs, ws;
    quad.rule(xs, ws);
    const bool half_line = fam.domain() == ConnectionFamily::Domain::compactified_half_line;

    std::vector<DifferentialForm> R;
    bool first = true;
    for (int ks = 0; ks < quad.nodes; ++ks) {
        const double s = xs[ks];
        for (int kt = 0; kt < quad.nodes; ++kt) {
            double t, jac;
            if (half_line) {
                const double u = xs[kt];
                t = u / (1.0 - u);
                jac = 1.0 / ((1.0 - u) * (1.0 - u));
            } else {
                t = fam.a() + (fam.b() - fam.a()) * xs[kt];
                jac = fam.b() - fam.a();
            }
            auto omega = fam.omega(s, t);
            auto ods = fam.omega_ds(s, t);
            auto odt = fam.omega_dt(s, t);
            for (std::size_t ic = 0; ic < omega.size(); ++ic) {
                MatrixForm curv = curvature_of(omega[ic]);
                DifferentialForm term = double_polarize(phi, ods[ic], odt[ic], curv);
                if (term.overflow()) {
                    if (first) R.push_back(term);
                    continue;
                }
                term *= cplx(ws[ks] * ws[kt] * jac);
                if (first)
                    R.push_back(std::move(term));
                else
                    R[ic] += term;
            }
            first = false;
        }
    }
    return R;
}

} // namespace cw
