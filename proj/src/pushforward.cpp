#include "cw/pushforward.hpp"

#include <cmath>
#include <sstream>

#include "eigen_util.hpp"

namespace cw {

ApproximateOne ApproximateOne::rational() {
    ApproximateOne a;
    a.chi = [](double t) { return t / (1.0 + t); };
    a.dchi = [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); };
    return a;
}

void ApproximateOne::validate() const {
    if (std::abs(chi(0.0)) > 1e-14) throw std::runtime_error("approximate one: chi(0) != 0");
    if (std::abs(chi(1e12) - 1.0) > 1e-9)
        throw std::runtime_error("approximate one: chi does not approach 1");
    for (double t = 1e-8; t < 1e9; t *= 3.7)
        if (dchi(t) < -1e-14) throw std::runtime_error("approximate one: chi not monotone");
}

namespace {

// stable chi(t/s^2)/t including t -> 0
double spectral_m(const ApproximateOne& chi, double t, double s) {
    const double s2 = s * s;
    const double u = t / s2;
    if (u < 1e-12) return chi.dchi(0.0) / s2;
    return chi.chi(u) / (u * s2);
}

double spectral_n(const ApproximateOne& chi, double t, double s) {
    return -2.0 * chi.dchi(t / (s * s)) / (s * s * s);
}

/// alpha* f(alpha alpha*) computed through the Hermitian form
/// S = hF^{1/2} alpha hE^{-1} alpha^H hF^{1/2}.
std::vector<MatrixForm> spectral_apply(const BundleMapData& alpha, const FiberMetric& hE,
                                       const FiberMetric& hF,
                                       const std::function<double(double)>& f) {
    const auto& cover = *alpha.source()->base();
    const int rE = alpha.source()->rank();
    const int rF = alpha.target()->rank();
    std::vector<MatrixForm> out;
    for (int ic = 0; ic < cover.chart_count(); ++ic) {
        const Chart& c = *cover.chart(ic);
        MatrixForm b(cover.chart(ic), rE, rF, 0);
        const bool ident = hE.is_identity() && hF.is_identity();
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd A = mat_at(alpha.A(ic), n);
            Eigen::MatrixXcd S, astar, hfr, hfi;
            if (ident) {
                astar = A.adjoint();
                S = A * astar;
            } else {
                Eigen::MatrixXcd he = mat_at(hE.h(ic), n);
                Eigen::MatrixXcd hf = mat_at(hF.h(ic), n);
                hermitian_sqrt(hf, hfr, hfi);
                astar = he.inverse() * A.adjoint() * hf;
                S = hfr * A * he.inverse() * A.adjoint() * hfr;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((S + S.adjoint()) * 0.5);
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            Eigen::VectorXd fv(ev.size());
            for (int i = 0; i < ev.size(); ++i) fv(i) = f(ev(i));
            Eigen::MatrixXcd fS = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
            Eigen::MatrixXcd m = ident ? fS : (hfi * fS * hfr).eval(); // f(alpha alpha*)
            set_mat(b, n, (astar * m).eval());
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<MatrixForm> hom_covariant_derivative(const BundleMapData& alpha,
                                                 const ConnectionData& D_E,
                                                 const ConnectionData& D_F) {
    std::vector<MatrixForm> out;
    const auto& cover = *alpha.source()->base();
    for (int ic = 0; ic < cover.chart_count(); ++ic) {
        MatrixForm d = matrix_d(alpha.A(ic));
        d += matrix_wedge(D_F.omega(ic), alpha.A(ic));
        d -= matrix_wedge(alpha.A(ic), D_E.omega(ic));
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace

MaskedBundleMap beta(const BundleMapData& alpha, const FiberMetric& hE, const FiberMetric& hF,
                     double mask_cells) {
    const auto& cover = *alpha.source()->base();
    const double floor2 = alpha.injectivity_floor() * alpha.injectivity_floor();
    MaskedBundleMap out{BundleMapData(alpha.target(), alpha.source(),
                                      spectral_apply(alpha, hE, hF,
                                                     [&](double t) {
                                                         return t > floor2 ? 1.0 / t : 0.0;
                                                     }),
                                      alpha.singular_points(), alpha.injectivity_floor()),
                        {}};
    // recompute with the floor check outside masks
    for (int ic = 0; ic < cover.chart_count(); ++ic) {
        const Chart& c = *cover.chart(ic);
        auto keep = singular_mask(c, ic, alpha.singular_points(), mask_cells);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            if (!keep[n]) continue;
            if (cover.partition(ic).at(0, n).real() <= 0.0) continue;
            const double s = singular_value_floor_at(alpha, hE, hF, ic, n);
            if (s * s <= floor2) {
                auto idx = c.unindex(n);
                std::ostringstream os;
                os << "beta: map loses injectivity at undeclared node (";
                for (int a = 0; a < c.dim(); ++a) os << (a ? "," : "") << idx[a];
                os << ") of chart '" << c.name() << "'";
                throw std::runtime_error(os.str());
            }
        }
        out.keep.push_back(std::move(keep));
    }
    return out;
}

std::vector<MatrixForm> beta_s(const BundleMapData& alpha, double s, const ApproximateOne& chi,
                               const FiberMetric& hE, const FiberMetric& hF) {
    if (!(s > 0.0)) throw std::invalid_argument("beta_s requires s > 0");
    return spectral_apply(alpha, hE, hF, [&](double t) { return spectral_m(chi, t, s); });
}

std::vector<MatrixForm> beta_s_dot(const BundleMapData& alpha, double s, const ApproximateOne& chi,
                                   const FiberMetric& hE, const FiberMetric& hF) {
    if (!(s > 0.0)) throw std::invalid_argument("beta_s_dot requires s > 0");
    return spectral_apply(alpha, hE, hF, [&](double t) { return spectral_n(chi, t, s); });
}

ConnectionFamily::ConnectionFamily(BundlePtr bundle,
                                   std::function<std::vector<MatrixForm>(double)> omega_at,
                                   std::function<std::vector<MatrixForm>(double)> omega_dot_at,
                                   Domain domain, double a, double b)
    : bundle_(std::move(bundle)), omega_at_(std::move(omega_at)),
      omega_dot_at_(std::move(omega_dot_at)), domain_(domain), a_(a), b_(b) {}

double ConnectionFamily::check_derivative(double s, double rel_step) const {
    const double h = s * rel_step;
    auto plus = omega_at_(s + h);
    auto minus = omega_at_(s - h);
    auto dot = omega_dot_at_(s);
    double worst = 0.0, scale = 1e-30;
    for (std::size_t ic = 0; ic < dot.size(); ++ic) {
        MatrixForm fd = plus[ic];
        fd -= minus[ic];
        fd *= cplx(1.0 / (2.0 * h));
        scale = std::max(scale, dot[ic].max_abs());
        fd -= dot[ic];
        worst = std::max(worst, fd.max_abs());
    }
    return worst / scale;
}

ConnectionFamily pushforward_family(const BundleMapData& alpha, const ConnectionData& D_E,
                                    const ConnectionData& D_F, const ApproximateOne& chi,
                                    const FiberMetric& hE, const FiberMetric& hF) {
    auto dhom = std::make_shared<std::vector<MatrixForm>>(hom_covariant_derivative(alpha, D_E, D_F));
    auto alpha_ptr = std::make_shared<BundleMapData>(alpha);
    auto chi_copy = std::make_shared<ApproximateOne>(chi);
    auto hE_ptr = std::make_shared<FiberMetric>(hE);
    auto hF_ptr = std::make_shared<FiberMetric>(hF);
    auto omega_F = std::make_shared<std::vector<MatrixForm>>();
    for (int ic = 0; ic < D_F.chart_count(); ++ic) omega_F->push_back(D_F.omega(ic));

    auto omega_at = [=](double s) {
        auto bs = beta_s(*alpha_ptr, s, *chi_copy, *hE_ptr, *hF_ptr);
        std::vector<MatrixForm> out;
        for (std::size_t ic = 0; ic < bs.size(); ++ic) {
            MatrixForm w = (*omega_F)[ic];
            w -= matrix_wedge((*dhom)[ic], bs[ic]);
            out.push_back(std::move(w));
        }
        return out;
    };
    auto omega_dot_at = [=](double s) {
        auto bd = beta_s_dot(*alpha_ptr, s, *chi_copy, *hE_ptr, *hF_ptr);
        std::vector<MatrixForm> out;
        for (std::size_t ic = 0; ic < bd.size(); ++ic) {
            MatrixForm w = matrix_wedge((*dhom)[ic], bd[ic]);
            w *= cplx(-1.0);
            out.push_back(std::move(w));
        }
        return out;
    };
    return ConnectionFamily(alpha.target(), omega_at, omega_dot_at);
}

ConnectionFamily pullback_family(const BundleMapData& alpha, const ConnectionData& D_E,
                                 const ConnectionData& D_F, const ApproximateOne& chi,
                                 const FiberMetric& hE, const FiberMetric& hF) {
    auto alpha_ptr = std::make_shared<BundleMapData>(alpha);
    auto chi_copy = std::make_shared<ApproximateOne>(chi);
    auto hE_ptr = std::make_shared<FiberMetric>(hE);
    auto hF_ptr = std::make_shared<FiberMetric>(hF);
    auto omega_E = std::make_shared<std::vector<MatrixForm>>();
    auto omega_F = std::make_shared<std::vector<MatrixForm>>();
    for (int ic = 0; ic < D_E.chart_count(); ++ic) {
        omega_E->push_back(D_E.omega(ic));
        omega_F->push_back(D_F.omega(ic));
    }
    auto assemble = [=](const std::vector<MatrixForm>& b) {
        std::vector<MatrixForm> out;
        for (std::size_t ic = 0; ic < b.size(); ++ic) {
            MatrixForm inner = matrix_wedge(b[ic], (*omega_F)[ic]); // beta omega_F
            inner -= matrix_d(b[ic]);
            inner -= matrix_wedge((*omega_E)[ic], b[ic]);
            out.push_back(matrix_wedge(inner, alpha_ptr->A(ic)));
        }
        return out;
    };
    auto omega_at = [=](double s) {
        auto out = assemble(beta_s(*alpha_ptr, s, *chi_copy, *hE_ptr, *hF_ptr));
        for (std::size_t ic = 0; ic < out.size(); ++ic) out[ic] += (*omega_E)[ic];
        return out;
    };
    auto omega_dot_at = [=](double s) {
        return assemble(beta_s_dot(*alpha_ptr, s, *chi_copy, *hE_ptr, *hF_ptr));
    };
    return ConnectionFamily(alpha.source(), omega_at, omega_dot_at);
}

std::vector<MatrixForm> kernel_projected_curvature(const BundleMapData& alpha,
                                                   const ConnectionData& D_E,
                                                   const FiberMetric& hE, const FiberMetric& hF) {
    // P_K = 1 - beta alpha with beta the metric right inverse; same
    // projected-curvature combination as the image complement
    const auto& cover = *alpha.source()->base();
    const int rE = alpha.source()->rank();
    std::vector<MatrixForm> out;
    const double floor2 = alpha.injectivity_floor() * alpha.injectivity_floor();
    auto b = spectral_apply(alpha, hE, hF,
                            [&](double t) { return t > floor2 ? 1.0 / t : 0.0; });
    for (int ic = 0; ic < cover.chart_count(); ++ic) {
        const Chart& c = *cover.chart(ic);
        MatrixForm Pk(cover.chart(ic), rE, rE, 0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd A = mat_at(alpha.A(ic), n);
            Eigen::MatrixXcd B = mat_at(b[ic], n);
            set_mat(Pk, n, (Eigen::MatrixXcd::Identity(rE, rE) - B * A).eval());
        }
        MatrixForm dPk = matrix_d(Pk);
        MatrixForm one_minus = MatrixForm::identity(cover.chart(ic), rE);
        one_minus -= Pk;
        const MatrixForm& w = D_E.omega(ic);
        MatrixForm OmegaE = curvature_of(w);
        MatrixForm term = matrix_wedge(matrix_wedge(Pk, OmegaE), Pk);
        term += matrix_wedge(matrix_wedge(Pk, matrix_wedge(dPk, dPk)), Pk);
        term += matrix_wedge(matrix_wedge(Pk, matrix_wedge(dPk, matrix_wedge(one_minus, w))), Pk);
        term -= matrix_wedge(matrix_wedge(Pk, matrix_wedge(w, matrix_wedge(one_minus, dPk))), Pk);
        out.push_back(std::move(term));
    }
    return out;
}

} // namespace cw
