#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cw/residue.hpp"

using namespace cw;
using std::abs;

namespace {

CoverPtr box_cover(double L, int n) {
    std::array<double, kMaxDim> lo{-L, -L}, hi{L, L};
    std::array<int, kMaxDim> res{n, n};
    std::array<bool, kMaxDim> per{false, false};
    auto c = std::make_shared<Chart>("box", 2, lo, hi, res, per);
    auto w = DifferentialForm::sample_scalar(c, [](const auto&) { return cplx(1.0); });
    return std::make_shared<ManifoldCover>(std::vector<ChartPtr>{c},
                                           std::vector<DifferentialForm>{w});
}

struct AbelianData {
    CoverPtr cover;
    BundlePtr E, F;
    std::shared_ptr<ConnectionData> DE, DF;
    std::shared_ptr<BundleMapData> alpha;
};

/// alpha(z) = z with one declared zero at the origin; omega_E, omega_F smooth
/// abelian connections.
AbelianData abelian_annulus(int n, double L = 1.2) {
    AbelianData d;
    d.cover = box_cover(L, n);
    d.E = std::make_shared<BundleData>(d.cover, 1);
    d.F = std::make_shared<BundleData>(d.cover, 1);
    const Chart& c = *d.cover->chart(0);
    MatrixForm wE(d.cover->chart(0), 1, 1, 1), wF(d.cover->chart(0), 1, 1, 1);
    MatrixForm A(d.cover->chart(0), 1, 1, 0);
    for (std::size_t nn = 0; nn < c.node_count(); ++nn) {
        auto x = c.coords(nn);
        wE.at(0, 0).at(0, nn) = cplx(0, 0.3 * x[1]);
        wE.at(0, 0).at(1, nn) = cplx(0, -0.25 * x[0]);
        wF.at(0, 0).at(0, nn) = cplx(0, -0.2 * x[1] * x[1]);
        wF.at(0, 0).at(1, nn) = cplx(0, 0.35 * x[0]);
        A.at(0, 0).at(0, nn) = cplx(x[0], x[1]);
    }
    d.DE = std::make_shared<ConnectionData>(d.E, std::vector<MatrixForm>{wE}, -1.0);
    d.DF = std::make_shared<ConnectionData>(d.F, std::vector<MatrixForm>{wF}, -1.0);
    d.alpha = std::make_shared<BundleMapData>(d.E, d.F, std::vector<MatrixForm>{A},
                                              std::vector<SingularPoint>{{0, Point{0.0, 0.0}}});
    return d;
}

std::vector<uint8_t> keep_outside(const Chart& c, double radius, double rim_cells = 2.0) {
    std::vector<uint8_t> keep(c.node_count(), 1);
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        auto x = c.coords(n);
        if (std::hypot(x[0], x[1]) < radius) keep[n] = 0;
        auto idx = c.unindex(n);
        for (int a = 0; a < c.dim(); ++a)
            if (idx[a] < rim_cells || idx[a] > c.res(a) - 1 - rim_cells) keep[n] = 0;
    }
    return keep;
}

} // namespace

TEST_CASE("quadrature rule: interior nodes, positive weights, exactness") {
    QuadratureSpec q{48};
    std::vector<double> x, w;
    q.rule(x, w);
    REQUIRE(static_cast<int>(x.size()) == 48);
    double total = 0;
    for (int i = 0; i < 48; ++i) {
        CHECK(x[i] > 0.0);
        CHECK(x[i] < 1.0);
        CHECK(w[i] > 0.0);
        total += w[i];
    }
    CHECK(abs(total - 1.0) < 1e-14);
    // exact on a high-degree polynomial
    double val = 0;
    for (int i = 0; i < 48; ++i) val += w[i] * std::pow(x[i], 17);
    CHECK(abs(val - 1.0 / 18.0) < 1e-14);
}

TEST_CASE("constant family transgresses to zero") {
    auto d = abelian_annulus(24);
    // alpha = 1 everywhere, equal connections: omega_s constant in s
    MatrixForm one = MatrixForm::identity(d.cover->chart(0), 1);
    BundleMapData aI(d.E, d.F, {one});
    auto fam = pushforward_family(aI, *d.DE, *d.DE, ApproximateOne::rational(),
                                  FiberMetric::identity(d.E), FiberMetric::identity(d.F));
    auto T = transgress(fam, make_chern(1, 1), QuadratureSpec{48});
    CHECK(T.forms[0].max_abs() < 1e-10);
}

TEST_CASE("abelian closed form: T = (i/2pi)(d alpha / alpha + omega_F - omega_E) off the zero") {
    auto d = abelian_annulus(64);
    auto fam = pushforward_family(*d.alpha, *d.DE, *d.DF, ApproximateOne::rational(),
                                  FiberMetric::identity(d.E), FiberMetric::identity(d.F));
    auto T = transgress(fam, make_chern(1, 1), QuadratureSpec{48});
    const Chart& c = *d.cover->chart(0);
    double err = 0;
    for (std::size_t n = 0; n < c.node_count(); ++n) {
        auto x = c.coords(n);
        const double r2 = x[0] * x[0] + x[1] * x[1];
        if (r2 < 0.2 * 0.2) continue;
        const cplx z(x[0], x[1]);
        // d alpha / alpha: components (1, i)/z
        const cplx tx = (cplx(0, 1) / (2 * M_PI)) *
                        (cplx(1.0) / z + d.DF->omega(0).at(0, 0).at(0, n) -
                         d.DE->omega(0).at(0, 0).at(0, n));
        const cplx ty = (cplx(0, 1) / (2 * M_PI)) *
                        (cplx(0, 1) / z + d.DF->omega(0).at(0, 0).at(1, n) -
                         d.DE->omega(0).at(0, 0).at(1, n));
        err = std::max(err, abs(T.forms[0].at(0, n) - tx));
        err = std::max(err, abs(T.forms[0].at(1, n) - ty));
    }
    CHECK(err < 1e-6);

    // residue-oriented sphere integral of T around the zero is 1
    ResidueOptions opts;
    opts.eps_list = {0.45, 0.35, 0.25};
    auto rec = compute_residue(T, 0, Point{0.0, 0.0}, opts, 1);
    CHECK(abs(rec.extrapolated - cplx(1.0)) < 1e-4);
    CHECK(rec.status == ResidueStatus::plateau);
}

TEST_CASE("quadrature refinement: node doubling changes T below 1e-8 away from the zero") {
    auto d = abelian_annulus(48);
    auto fam = pushforward_family(*d.alpha, *d.DE, *d.DF, ApproximateOne::rational(),
                                  FiberMetric::identity(d.E), FiberMetric::identity(d.F));
    auto T48 = transgress(fam, make_chern(1, 1), QuadratureSpec{48});
    auto T96 = transgress(fam, make_chern(1, 1), QuadratureSpec{96});
    auto keep = keep_outside(*d.cover->chart(0), 0.25);
    DifferentialForm diff = T48.forms[0];
    diff -= T96.forms[0];
    CHECK(diff.max_abs(&keep) < 1e-8);
}

TEST_CASE("transgression identity: flat-to-flat with constant alpha is exact") {
    auto cover = box_cover(1.0, 24);
    auto E = std::make_shared<BundleData>(cover, 1);
    auto F = std::make_shared<BundleData>(cover, 1);
    MatrixForm one = MatrixForm::identity(cover->chart(0), 1);
    one *= cplx(1.5, 0.2);
    BundleMapData alpha(E, F, {one});
    ConnectionData DE(E, {MatrixForm(cover->chart(0), 1, 1, 1)}, -1.0);
    ConnectionData DF(F, {MatrixForm(cover->chart(0), 1, 1, 1)}, -1.0);
    auto fam = pushforward_family(alpha, DE, DF, ApproximateOne::rational(),
                                  FiberMetric::identity(E), FiberMetric::identity(F));
    auto phi = make_chern(1, 1);
    auto T = transgress(fam, phi, QuadratureSpec{48});
    auto vF = evaluate(phi, curvature(DF)[0]);
    auto vE = evaluate(phi, curvature(DE)[0]);
    auto resid = check_transgression_identity(T, {vF}, {vE}, {});
    CHECK(resid.sup < 1e-10);
}

TEST_CASE("transgression identity residual is second order on the abelian annulus") {
    auto run = [](int n) {
        auto d = abelian_annulus(n);
        auto fam = pushforward_family(*d.alpha, *d.DE, *d.DF, ApproximateOne::rational(),
                                      FiberMetric::identity(d.E), FiberMetric::identity(d.F));
        auto phi = make_chern(1, 1);
        auto T = transgress(fam, phi, QuadratureSpec{48});
        auto vF = evaluate(phi, curvature(*d.DF)[0]);
        auto vE = evaluate(phi, curvature(*d.DE)[0]);
        auto keep = keep_outside(*d.cover->chart(0), 0.2);
        return check_transgression_identity(T, {vF}, {vE}, {keep}).sup;
    };
    const double e64 = run(64), e128 = run(128);
    CHECK(e64 / e128 >= 3.5);
}

TEST_CASE("surjective variant: identity residual for the mirrored family is second order") {
    auto run = [](int n) {
        auto cover = box_cover(1.2, n);
        auto E = std::make_shared<BundleData>(cover, 2);
        auto F = std::make_shared<BundleData>(cover, 1);
        const Chart& c = *cover->chart(0);
        MatrixForm A(cover->chart(0), 1, 2, 0);
        MatrixForm wE(cover->chart(0), 2, 2, 1);
        MatrixForm wF(cover->chart(0), 1, 1, 1);
        for (std::size_t nn = 0; nn < c.node_count(); ++nn) {
            auto x = c.coords(nn);
            A.at(0, 0).at(0, nn) = cplx(1.0, 0.2 * x[1]);
            A.at(0, 1).at(0, nn) = cplx(0.3 * x[0], -0.15);
            wE.at(0, 0).at(0, nn) = cplx(0, 0.2 * x[1]);
            wE.at(1, 1).at(1, nn) = cplx(0, -0.3 * x[0]);
            wE.at(0, 1).at(0, nn) = cplx(0.05 * x[0], 0);
            wE.at(1, 0).at(0, nn) = cplx(-0.05 * x[0], 0);
            wF.at(0, 0).at(1, nn) = cplx(0, 0.25 * x[0]);
        }
        BundleMapData alpha(E, F, {A});
        ConnectionData DE(E, {wE}, -1.0);
        ConnectionData DF(F, {wF}, -1.0);
        auto idE = FiberMetric::identity(E);
        auto idF = FiberMetric::identity(F);
        auto fam = pullback_family(alpha, DE, DF, ApproximateOne::rational(), idE, idF);
        auto phi = make_chern(1, 2);
        auto T = transgress(fam, phi, QuadratureSpec{48});
        // phi(D_E) - phi(D_F + D_K): the kernel part through the projected curvature
        auto vE = evaluate(phi, curvature(DE)[0]);
        auto vF = evaluate(make_chern(1, 1), curvature(DF)[0]);
        auto vK = evaluate(phi, kernel_projected_curvature(alpha, DE, idE, idF)[0]);
        auto vStart = vF;
        vStart += vK;
        auto keep = keep_outside(c, 0.0, 3.0);
        return check_transgression_identity(T, {vE}, {vStart}, {keep}).sup;
    };
    const double e48 = run(48), e96 = run(96);
    CHECK(e48 / e96 >= 3.0);
    CHECK(e48 < 0.05);
}

TEST_CASE("double transgression: constant homotopy gives R = 0; c1 gives R = 0 structurally") {
    auto d = abelian_annulus(24);
    auto chi = ApproximateOne::rational();
    auto idE = FiberMetric::identity(d.E);
    auto idF = FiberMetric::identity(d.F);
    auto base = pushforward_family(*d.alpha, *d.DE, *d.DF, chi, idE, idF);
    TwoParamFamily fam(
        d.F, [&](double, double t) { return base.omega(t); },
        [&](double, double t) {
            auto z = base.omega(t);
            for (auto& m : z) m *= cplx(0.0);
            return z;
        },
        [&](double, double t) { return base.omega_dot(t); },
        ConnectionFamily::Domain::compactified_half_line, 0.0, 1.0);
    auto R = double_transgress(fam, make_chern(1, 1), QuadratureSpec{24});
    CHECK(R[0].max_abs() < 1e-10);
}

TEST_CASE("double transgression rejects families with drifting endpoints") {
    auto cover = box_cover(1.0, 16);
    auto E = std::make_shared<BundleData>(cover, 1);
    auto mk = [&](double scale) {
        MatrixForm w(cover->chart(0), 1, 1, 1);
        const Chart& c = *cover->chart(0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            auto x = c.coords(n);
            w.at(0, 0).at(0, n) = cplx(0, scale * x[1]);
        }
        return w;
    };
    TwoParamFamily fam(
        E,
        [&](double s, double t) {
            return std::vector<MatrixForm>{mk(t / (1.0 + t) + 0.3 * s)}; // endpoint drifts with s
        },
        [&](double, double) { return std::vector<MatrixForm>{mk(0.3)}; },
        [&](double, double t) {
            return std::vector<MatrixForm>{mk(1.0 / ((1.0 + t) * (1.0 + t)))};
        },
        ConnectionFamily::Domain::compactified_half_line, 0.0, 1.0);
    CHECK_THROWS_AS(double_transgress(fam, make_chern(1, 1), QuadratureSpec{16}),
                    std::runtime_error);
}

TEST_CASE("fixed-endpoint two-parameter family satisfies T1 - T0 = dR at second order") {
    // synthetic rank-2 family on a 3-D box with honest s2 content
    auto run = [](int n) {
        std::array<double, kMaxDim> lo{-1, -1, -1}, hi{1, 1, 1};
        std::array<int, kMaxDim> res{n, n, n};
        std::array<bool, kMaxDim> per{false, false, false};
        auto c = std::make_shared<Chart>("b3", 3, lo, hi, res, per);
        auto w = DifferentialForm::sample_scalar(c, [](const auto&) { return cplx(1.0); });
        auto cover = std::make_shared<ManifoldCover>(std::vector<ChartPtr>{c},
                                                     std::vector<DifferentialForm>{w});
        auto E = std::make_shared<BundleData>(cover, 2);
        auto sampled = [&](const std::function<cplx(int, int, int, const Point&)>& f) {
            MatrixForm m(c, 2, 2, 1);
            for (std::size_t nn = 0; nn < c->node_count(); ++nn) {
                Point x = c->coords(nn);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        for (int ax = 0; ax < 3; ++ax) m.at(i, j).at(ax, nn) = f(i, j, ax, x);
            }
            return m;
        };
        auto wA = sampled([](int i, int j, int ax, const Point& x) {
            return cplx(0.2 * std::sin(x[ax] + i), 0.1 * x[(ax + 1) % 3] * (j + 1));
        });
        auto wB = sampled([](int i, int j, int ax, const Point& x) {
            return cplx(0.15 * std::cos(x[(ax + 2) % 3] - j), 0.2 * x[ax] * (i + 1));
        });
        auto M = sampled([](int i, int j, int ax, const Point& x) {
            return cplx(0.3 * std::sin(2 * x[(ax + i) % 3]), 0.25 * std::cos(x[(ax + j) % 3]));
        });
        auto omega = [=](double s, double t) {
            MatrixForm m = wA;
            MatrixForm bd = wB;
            bd -= wA;
            bd *= cplx(t * t * (3 - 2 * t)); // smooth ramp 0 -> 1
            m += bd;
            MatrixForm bump = M;
            bump *= cplx(t * (1 - t) * s);
            m += bump;
            return std::vector<MatrixForm>{m};
        };
        auto omega_ds = [=](double, double t) {
            MatrixForm bump = M;
            bump *= cplx(t * (1 - t));
            return std::vector<MatrixForm>{bump};
        };
        auto omega_dt = [=](double s, double t) {
            MatrixForm m = wB;
            m -= wA;
            m *= cplx(6 * t * (1 - t));
            MatrixForm bump = M;
            bump *= cplx((1 - 2 * t) * s);
            m += bump;
            return std::vector<MatrixForm>{m};
        };
        TwoParamFamily fam(E, omega, omega_ds, omega_dt, ConnectionFamily::Domain::interval, 0.0,
                           1.0);
        CHECK(fam.endpoint_drift() < 1e-12);
        auto phi = make_power_sum(2);
        QuadratureSpec q{16};
        auto R = double_transgress(fam, phi, q);
        auto T0 = transgress(fam.slice(0.0), phi, q);
        auto T1 = transgress(fam.slice(1.0), phi, q);
        DifferentialForm resid = T1.forms[0];
        resid -= T0.forms[0];
        resid -= exterior_derivative(R[0]);
        return resid.max_abs();
    };
    const double e16 = run(16), e32 = run(32);
    CHECK(e16 / e32 >= 3.2);
    CHECK(e16 < 0.2);
}

TEST_CASE("pullback consistency: transgression commutes with a diffeomorphic reparametrization") {
    const int n = 96;
    auto d = abelian_annulus(n, 1.5);
    auto chi = ApproximateOne::rational();
    auto idE = FiberMetric::identity(d.E);
    auto idF = FiberMetric::identity(d.F);
    auto fam = pushforward_family(*d.alpha, *d.DE, *d.DF, chi, idE, idF);
    auto phi = make_chern(1, 1);
    auto T = transgress(fam, phi, QuadratureSpec{48});

    // mild warp of a smaller box into the chart
    auto cover2 = box_cover(1.0, n);
    auto psi_map = [](const Point& x) {
        return Point{x[0] + 0.1 * std::sin(x[1]), x[1] - 0.08 * std::cos(x[0])};
    };
    SampledMap psi(cover2->chart(0), d.cover->chart(0), psi_map);

    // pull the data back, rebuild the family, transgress
    auto E2 = std::make_shared<BundleData>(cover2, 1);
    auto F2 = std::make_shared<BundleData>(cover2, 1);
    ConnectionData DE2(E2, {pullback(d.DE->omega(0), psi)}, -1.0);
    ConnectionData DF2(F2, {pullback(d.DF->omega(0), psi)}, -1.0);
    MatrixForm A2 = pullback(d.alpha->A(0), psi);
    BundleMapData alpha2(E2, F2, {A2},
                         {SingularPoint{0, Point{0.077302, 0.079889}}}); // preimage of 0, approx
    auto fam2 = pushforward_family(alpha2, DE2, DF2, chi, FiberMetric::identity(E2),
                                   FiberMetric::identity(F2));
    auto T2 = transgress(fam2, phi, QuadratureSpec{48});
    auto Tpulled = pullback(T.forms[0], psi);

    const Chart& c2 = *cover2->chart(0);
    double err = 0;
    for (std::size_t nn = 0; nn < c2.node_count(); ++nn) {
        auto x = c2.coords(nn);
        if (std::hypot(x[0] - 0.0773, x[1] - 0.0799) < 0.35) continue;
        for (int comp = 0; comp < 2; ++comp)
            err = std::max(err, abs(T2.forms[0].at(comp, nn) - Tpulled.at(comp, nn)));
    }
    CHECK(err < 1e-6);
}
