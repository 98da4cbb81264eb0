#include "cw/residue.hpp"

#include <cmath>

#include "eigen_util.hpp"

namespace cw {

double smoothstep_quintic(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double smoothstep_septic(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * u * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u);
}

namespace {
double smoothstep_quintic_prime(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}
} // namespace

double NormalizationProfile::lambda(double t) const {
    return smoothstep_quintic((t - eps / 2) / (eps / 2));
}

double NormalizationProfile::lambda_prime(double t) const {
    return smoothstep_quintic_prime((t - eps / 2) / (eps / 2)) / (eps / 2);
}

double NormalizationProfile::radius_map(double t) const {
    const double S = smoothstep_quintic((t - eps / 2) / (eps / 2));
    return (1.0 - S) * (eps / 2) + S * t;
}

void NormalizationProfile::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("normalization profile: eps must be positive");
    if (lambda(eps / 2) != 0.0 || lambda(eps / 4) != 0.0)
        throw std::runtime_error("profile: lambda must vanish below eps/2");
    if (lambda(eps) != 1.0 || lambda(2 * eps) != 1.0)
        throw std::runtime_error("profile: lambda must be 1 above eps");
    if (radius_map(eps / 4) != eps / 2 || radius_map(eps) != eps)
        throw std::runtime_error("profile: radius map endpoints wrong");
    double prev_l = 1e300;
    for (int i = 1; i <= 400; ++i) {
        const double t = eps * 1.2 * i / 400.0;
        if (lambda_prime(t) < -1e-14) throw std::runtime_error("profile: lambda not monotone");
        const double lcur = l(t);
        if (lcur > prev_l + 1e-12) throw std::runtime_error("profile: l not monotone decreasing");
        prev_l = lcur;
    }
}

namespace {

double dist(const Point& x, const Point& p, int dim) {
    double d2 = 0;
    for (int a = 0; a < dim; ++a) d2 += (x[a] - p[a]) * (x[a] - p[a]);
    return std::sqrt(d2);
}

} // namespace

ConnectionData normalize_connection(const ConnectionData& D, int chart, const Point& p,
                                    const NormalizationProfile& prof) {
    const auto& cover = *D.bundle()->base();
    const ChartPtr& cp = cover.chart(chart);
    const Chart& c = *cp;
    const int dim = c.dim();
    for (int a = 0; a < dim; ++a)
        if (p[a] - prof.eps < c.lo(a) || p[a] + prof.eps > c.hi(a))
            throw std::out_of_range("normalization ball exits chart box");

    const int r = D.bundle()->rank();
    CubicInterpolator interp(cp);
    std::vector<MatrixForm> omega;
    for (int ic = 0; ic < D.chart_count(); ++ic) omega.push_back(D.omega(ic));

    MatrixForm& w = omega[chart];
    const MatrixForm orig = w;
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        const Point x = c.coords(n);
        const double rr = dist(x, p, dim);
        if (rr >= prof.eps) continue; // identity region: exact copy already in place
        const double lam = prof.lambda(rr);
        const double lamp = prof.lambda_prime(rr);
        Point y{};
        double u[kMaxDim] = {0, 0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            u[a] = rr > 1e-14 ? (x[a] - p[a]) / rr : 0.0;
            y[a] = p[a] + lam * (x[a] - p[a]);
        }
        // J[i][j] = d y_i / d x_j = lam delta_ij + lamp (x-p)_i u_j
        double J[kMaxDim][kMaxDim];
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                J[i][j] = (i == j ? lam : 0.0) + lamp * (x[i] - p[i]) * u[j];
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                cplx src[kMaxDim];
                for (int ax = 0; ax < dim; ++ax) src[ax] = interp(orig.at(a, b).comp(ax), y);
                for (int ax = 0; ax < dim; ++ax) {
                    cplx acc(0.0);
                    for (int i = 0; i < dim; ++i) acc += src[i] * J[i][ax];
                    w.at(a, b).at(ax, n) = acc;
                }
            }
    }
    return ConnectionData(D.bundle(), std::move(omega), -1.0);
}

BundleMapData normalize_map(const BundleMapData& alpha, int chart, const Point& p,
                            const NormalizationProfile& prof) {
    const auto& cover = *alpha.source()->base();
    const ChartPtr& cp = cover.chart(chart);
    const Chart& c = *cp;
    const int dim = c.dim();
    for (int a = 0; a < dim; ++a)
        if (p[a] - prof.eps < c.lo(a) || p[a] + prof.eps > c.hi(a))
            throw std::out_of_range("normalization ball exits chart box");

    // the singularity must be isolated at the center of the ball
    for (const auto& sp : alpha.singular_points()) {
        if (sp.chart != chart) continue;
        const double d = dist(sp.coords, p, dim);
        if (d > 1e-12 && d < prof.eps)
            throw std::runtime_error("normalize_map: another singular point inside the ball");
    }

    CubicInterpolator interp(cp);
    std::vector<MatrixForm> A;
    for (int ic = 0; ic < cover.chart_count(); ++ic) A.push_back(alpha.A(ic));
    MatrixForm& m = A[chart];
    const MatrixForm orig = m;
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        const Point x = c.coords(n);
        const double rr = dist(x, p, dim);
        if (rr >= prof.eps) continue; // bit-identical outside the ball
        Point y{};
        if (rr <= 1e-14) continue;    // the singular center keeps its value
        const double scale = prof.radius_map(rr) / rr;
        for (int a = 0; a < dim; ++a) y[a] = p[a] + scale * (x[a] - p[a]);
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) m.at(i, j).at(0, n) = interp(orig.at(i, j).comp(0), y);
    }
    return BundleMapData(alpha.source(), alpha.target(), std::move(A), alpha.singular_points(),
                         alpha.injectivity_floor());
}

double radial_variation(const MatrixForm& field, const Point& p, double r_lo, double r_hi,
                        int rays, int steps) {
    const Chart& c = *field.chart();
    if (c.dim() != 2) throw std::invalid_argument("radial_variation: 2-D charts only");
    CubicInterpolator interp(field.chart());
    double worst = 0.0;
    for (int k = 0; k < rays; ++k) {
        const double th = 2.0 * M_PI * k / rays;
        for (int i = 0; i < field.rows(); ++i)
            for (int j = 0; j < field.cols(); ++j) {
                cplx ref(0.0);
                for (int sidx = 0; sidx <= steps; ++sidx) {
                    const double rr = r_lo + (r_hi - r_lo) * sidx / steps;
                    Point x{p[0] + rr * std::cos(th), p[1] + rr * std::sin(th)};
                    const cplx v = interp(field.at(i, j).comp(0), x);
                    if (sidx == 0)
                        ref = v;
                    else
                        worst = std::max(worst, std::abs(v - ref));
                }
            }
    }
    return worst;
}

SingularityRecord compute_residue(const TransgressionField& T, int chart, const Point& p,
                                  const ResidueOptions& opts, int phi_degree) {
    SingularityRecord rec;
    rec.chart = chart;
    rec.point = p;
    rec.eps_list = opts.eps_list;

    const DifferentialForm& f = T.forms.at(chart);
    const int dim = f.chart()->dim();
    rec.degree_bookkeeping = 2 * phi_degree - dim;

    // fiber integration of a form of degree below the sphere dimension is
    // exactly zero; negative residue degree forces the zero record
    if (f.overflow() || f.degree() != dim - 1 || rec.degree_bookkeeping < 0) {
        rec.status = ResidueStatus::structural_zero;
        rec.extrapolated = cplx(0.0);
        rec.per_eps.assign(opts.eps_list.size(), cplx(0.0));
        return rec;
    }

    for (double eps : opts.eps_list) {
        SpherePatch s(f.chart(), p, eps, opts.sphere_resolution);
        // boundary-of-the-complement orientation
        rec.per_eps.push_back(-sphere_integrate(f, s));
    }

    double lo = 1e300, hi = -1e300;
    cplx mean(0.0);
    for (const cplx& v : rec.per_eps) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
        mean += v;
    }
    mean /= static_cast<double>(rec.per_eps.size());
    const double scale = std::max(std::abs(mean), 1e-9);
    rec.spread = (hi - lo) / scale;

    if (rec.spread <= opts.plateau_tol) {
        rec.status = ResidueStatus::plateau;
        rec.extrapolated = mean;
    } else {
        // even-power model R(eps) = R0 + c eps^2 (odd circle moments vanish)
        const int m = static_cast<int>(rec.per_eps.size());
        double s1 = m, sx = 0, sxx = 0;
        cplx sy(0.0), sxy(0.0);
        for (int i = 0; i < m; ++i) {
            const double xi = opts.eps_list[i] * opts.eps_list[i];
            sx += xi;
            sxx += xi * xi;
            sy += rec.per_eps[i];
            sxy += xi * rec.per_eps[i];
        }
        const double det = s1 * sxx - sx * sx;
        rec.extrapolated = (sxx * sy - sx * sxy) / det;
        rec.status = ResidueStatus::extrapolated;
        // non-convergence: spread too large and values not monotone in eps
        bool monotone = true;
        for (int i = 2; i < m; ++i) {
            const double d1 = rec.per_eps[i - 1].real() - rec.per_eps[i - 2].real();
            const double d2 = rec.per_eps[i].real() - rec.per_eps[i - 1].real();
            if (d1 * d2 < 0) monotone = false;
        }
        if (!monotone && rec.spread > 10 * opts.plateau_tol)
            rec.status = ResidueStatus::not_extendable;
    }
    if (std::abs(rec.extrapolated.imag()) > opts.imag_tol &&
        rec.status != ResidueStatus::not_extendable)
        rec.status = ResidueStatus::not_extendable;
    return rec;
}

} // namespace cw
