#include "cw/bundle.hpp"

#include <cmath>
#include <sstream>

#include "eigen_util.hpp"

namespace cw {

namespace {

// probe stride for validation passes; odd so row-major sampling does not
// lock onto a single grid column
std::size_t probe_step(const Chart& c) {
    return std::max<std::size_t>(1, (c.node_count() / 256) | 1);
}

} // namespace

BundleData::BundleData(CoverPtr base, int rank, bool complex_field)
    : base_(std::move(base)), rank_(rank), complex_(complex_field) {
    if (rank_ < 0) throw std::invalid_argument("bundle rank must be nonnegative");
}

void BundleData::set_transition(int i, int j, MatrixForm g) {
    if (g.rows() != rank_ || g.cols() != rank_ || g.degree() != 0)
        throw std::invalid_argument("bundle transition must be a degree-0 rank x rank field");
    transitions_[{i, j}] = std::move(g);
}

const MatrixForm* BundleData::transition(int i, int j) const {
    auto it = transitions_.find({i, j});
    return it == transitions_.end() ? nullptr : &it->second;
}

void BundleData::validate(double tol) const {
    if (rank_ == 0) return;
    std::vector<cplx> buf(static_cast<std::size_t>(rank_) * rank_);
    for (const auto& [key, gij] : transitions_) {
        auto [i, j] = key;
        const MatrixForm* gji = transition(j, i);
        const Transition* t = base_->transition(i, j);
        if (!gji || !t) continue;
        const Chart& cj = *base_->chart(j);
        CubicInterpolator interp(base_->chart(i));
        for (std::size_t n = 0; n < cj.node_count(); n += probe_step(cj)) {
            const Point x = cj.coords(n);
            if (t->defined && !t->defined(x)) continue;
            const Point y = t->map(x);
            if (!base_->chart(i)->contains(y, 0.0)) continue;
            Eigen::MatrixXcd a(rank_, rank_), b(rank_, rank_);
            if (transition_fn_) {
                transition_fn_(i, j, x, buf);
                for (int r = 0; r < rank_; ++r)
                    for (int c = 0; c < rank_; ++c) a(r, c) = buf[r * rank_ + c];
                transition_fn_(j, i, y, buf);
                for (int r = 0; r < rank_; ++r)
                    for (int c = 0; c < rank_; ++c) b(r, c) = buf[r * rank_ + c];
            } else {
                a = mat_at(gij, n);
                for (int r = 0; r < rank_; ++r)
                    for (int c = 0; c < rank_; ++c) b(r, c) = interp(gji->at(r, c).comp(0), y);
            }
            const double err = (b * a - Eigen::MatrixXcd::Identity(rank_, rank_)).cwiseAbs().maxCoeff();
            if (err > tol) {
                std::ostringstream os;
                os << "bundle cocycle violation between charts " << i << "," << j << ": " << err;
                throw std::runtime_error(os.str());
            }
        }
    }
}

ConnectionData::ConnectionData(BundlePtr bundle, std::vector<MatrixForm> omega, double compat_tol)
    : bundle_(std::move(bundle)), omega_(std::move(omega)) {
    const int nch = bundle_->base()->chart_count();
    if (static_cast<int>(omega_.size()) != nch)
        throw std::invalid_argument("connection: one omega per chart");
    for (int i = 0; i < nch; ++i) {
        if (bundle_->rank() == 0) continue;
        if (omega_[i].rows() != bundle_->rank() || omega_[i].degree() != 1)
            throw std::invalid_argument("connection: omega must be degree-1 rank x rank");
        if (!omega_[i].chart()->same_grid(*bundle_->base()->chart(i)))
            throw std::invalid_argument("connection: omega chart mismatch");
    }
    if (bundle_->rank() == 0) return;

    // overlap compatibility: omega_j = g^-1 (T* omega_i) g + g^-1 dg
    const ManifoldCover& cover = *bundle_->base();
    double worst = 0.0;
    for (int i = 0; i < nch; ++i) {
        for (int j = 0; j < nch; ++j) {
            if (i == j) continue;
            const MatrixForm* g = bundle_->transition(i, j);
            const Transition* t = cover.transition(i, j);
            if (!g || !t) continue;
            const Chart& cj = *cover.chart(j);
            const int dim = cj.dim();
            const int r = bundle_->rank();
            MatrixForm dg = matrix_d(*g);
            CubicInterpolator interp(cover.chart(i));
            for (std::size_t n = 0; n < cj.node_count(); n += probe_step(cj)) {
                const Point x = cj.coords(n);
                if (t->defined && !t->defined(x)) continue;
                const Point y = t->map(x);
                if (!cover.chart(i)->contains(y, 0.0)) continue;
                const auto J = t->jac ? t->jac(x) : SampledMap::Jacobian{};
                if (!t->jac) continue; // no Jacobian closure: skip quantitative check
                Eigen::MatrixXcd G = mat_at(*g, n);
                Eigen::MatrixXcd Ginv = G.inverse();
                for (int ax = 0; ax < dim; ++ax) {
                    // pulled omega_i component along axis ax at x
                    Eigen::MatrixXcd wi = Eigen::MatrixXcd::Zero(r, r);
                    for (int src = 0; src < dim; ++src) {
                        Eigen::MatrixXcd wsrc(r, r);
                        for (int a = 0; a < r; ++a)
                            for (int b = 0; b < r; ++b)
                                wsrc(a, b) = interp(omega_[i].at(a, b).comp(src), y);
                        wi += wsrc * J[src][ax];
                    }
                    Eigen::MatrixXcd dgax = mat_at(dg, n, ax);
                    Eigen::MatrixXcd wj = mat_at(omega_[j], n, ax);
                    const double err = (wj - (Ginv * wi * G + Ginv * dgax)).cwiseAbs().maxCoeff();
                    worst = std::max(worst, err);
                }
            }
        }
    }
    compat_residual_ = worst;
    if (compat_tol >= 0.0 && worst > compat_tol)
        throw std::runtime_error("connection transition compatibility residual " +
                                 std::to_string(worst) + " exceeds tolerance");
}

FiberMetric::FiberMetric(BundlePtr bundle, std::vector<MatrixForm> h)
    : bundle_(std::move(bundle)), h_(std::move(h)) {
    const int r = bundle_->rank();
    for (auto& hm : h_) {
        if (hm.rows() != r || hm.cols() != r || hm.degree() != 0)
            throw std::invalid_argument("metric must be degree-0 rank x rank");
        const std::size_t nodes = hm.chart()->node_count();
        for (std::size_t n = 0; n < nodes; n += probe_step(*hm.chart())) {
            Eigen::MatrixXcd m = mat_at(hm, n);
            if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 0.0)
                throw std::runtime_error("metric not Hermitian");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
            if (es.eigenvalues().minCoeff() <= 1e-10)
                throw std::runtime_error("metric not positive definite");
        }
    }
}

FiberMetric FiberMetric::identity(BundlePtr bundle) {
    std::vector<MatrixForm> h;
    const auto& cover = *bundle->base();
    for (int i = 0; i < cover.chart_count(); ++i)
        h.push_back(MatrixForm::identity(cover.chart(i), bundle->rank()));
    FiberMetric m(bundle, std::move(h));
    m.identity_ = true;
    return m;
}

BundleMapData::BundleMapData(BundlePtr source, BundlePtr target, std::vector<MatrixForm> A,
                             std::vector<SingularPoint> singular_points, double injectivity_floor)
    : source_(std::move(source)), target_(std::move(target)), A_(std::move(A)),
      sing_(std::move(singular_points)), floor_(injectivity_floor) {
    const int nch = source_->base()->chart_count();
    if (static_cast<int>(A_.size()) != nch) throw std::invalid_argument("bundle map: one field per chart");
    for (const auto& a : A_)
        if (a.rows() != target_->rank() || a.cols() != source_->rank() || a.degree() != 0)
            throw std::invalid_argument("bundle map: wrong shape");
}

std::vector<uint8_t> singular_mask(const Chart& chart, int chart_index,
                                   const std::vector<SingularPoint>& pts, double cells) {
    double hmax = 0.0;
    for (int a = 0; a < chart.dim(); ++a) hmax = std::max(hmax, chart.spacing(a));
    const double radius = cells * hmax;
    std::vector<uint8_t> keep(chart.node_count(), 1);
    for (const auto& p : pts) {
        if (p.chart != chart_index) continue;
        for (std::size_t n = 0; n < chart.node_count(); ++n) {
            const Point x = chart.coords(n);
            double d2 = 0.0;
            for (int a = 0; a < chart.dim(); ++a) {
                const double dd = x[a] - p.coords[a];
                d2 += dd * dd;
            }
            if (d2 < radius * radius) keep[n] = 0;
        }
    }
    return keep;
}

double singular_value_floor_at(const BundleMapData& alpha, const FiberMetric& hE,
                               const FiberMetric& hF, int chart, std::size_t node) {
    Eigen::MatrixXcd A = mat_at(alpha.A(chart), node);
    if (!hE.is_identity() || !hF.is_identity()) {
        Eigen::MatrixXcd rE, riE, rF, riF;
        hermitian_sqrt(mat_at(hE.h(chart), node), rE, riE);
        hermitian_sqrt(mat_at(hF.h(chart), node), rF, riF);
        A = rF * A * riE;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues().minCoeff();
}

void BundleMapData::check_injectivity(double mask_radius_cells) const {
    FiberMetric idE = FiberMetric::identity(source_);
    FiberMetric idF = FiberMetric::identity(target_);
    const auto& cover = *source_->base();
    for (int i = 0; i < cover.chart_count(); ++i) {
        const Chart& c = *cover.chart(i);
        auto keep = singular_mask(c, i, sing_, mask_radius_cells);
        for (std::size_t n = 0; n < c.node_count(); n += probe_step(c)) {
            if (!keep[n]) continue;
            if (cover.partition(i).at(0, n).real() <= 0.0) continue;
            const double s = singular_value_floor_at(*this, idE, idF, i, n);
            if (s < floor_) {
                auto idx = c.unindex(n);
                std::ostringstream os;
                os << "bundle map loses injectivity at undeclared node (";
                for (int a = 0; a < c.dim(); ++a) os << (a ? "," : "") << idx[a];
                os << ") of chart '" << c.name() << "': sigma_min = " << s;
                throw std::runtime_error(os.str());
            }
        }
    }
}

void BundleMapData::validate_intertwining(double tol) const {
    const ManifoldCover& cover = *source_->base();
    for (int i = 0; i < cover.chart_count(); ++i)
        for (int j = 0; j < cover.chart_count(); ++j) {
            if (i == j) continue;
            const MatrixForm* gE = source_->transition(i, j);
            const MatrixForm* gF = target_->transition(i, j);
            const Transition* t = cover.transition(i, j);
            if (!gE || !gF || !t) continue;
            const Chart& cj = *cover.chart(j);
            CubicInterpolator interp(cover.chart(i));
            for (std::size_t n = 0; n < cj.node_count(); n += probe_step(cj)) {
                const Point x = cj.coords(n);
                if (t->defined && !t->defined(x)) continue;
                const Point y = t->map(x);
                if (!cover.chart(i)->contains(y, 0.0)) continue;
                Eigen::MatrixXcd Ai(target_->rank(), source_->rank());
                for (int a = 0; a < target_->rank(); ++a)
                    for (int b = 0; b < source_->rank(); ++b)
                        Ai(a, b) = interp(A_[i].at(a, b).comp(0), y);
                const Eigen::MatrixXcd lhs = Ai * mat_at(*gE, n);
                const Eigen::MatrixXcd rhs = mat_at(*gF, n) * mat_at(A_[j], n);
                if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
                    throw std::runtime_error("bundle map does not intertwine transitions");
            }
        }
}

std::vector<MatrixForm> curvature(const ConnectionData& D) {
    std::vector<MatrixForm> out;
    out.reserve(D.chart_count());
    for (int i = 0; i < D.chart_count(); ++i) out.push_back(curvature_of(D.omega(i)));
    return out;
}

BundleMapData adjoint(const BundleMapData& alpha, const FiberMetric& hE, const FiberMetric& hF) {
    const auto& cover = *alpha.source()->base();
    std::vector<MatrixForm> out;
    for (int i = 0; i < cover.chart_count(); ++i) {
        const Chart& c = *cover.chart(i);
        MatrixForm astar(cover.chart(i), alpha.source()->rank(), alpha.target()->rank(), 0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd A = mat_at(alpha.A(i), n);
            Eigen::MatrixXcd v;
            if (hE.is_identity() && hF.is_identity()) {
                v = A.adjoint();
            } else {
                Eigen::MatrixXcd he = mat_at(hE.h(i), n);
                Eigen::MatrixXcd hf = mat_at(hF.h(i), n);
                v = he.inverse() * A.adjoint() * hf;
            }
            set_mat(astar, n, v);
        }
        out.push_back(std::move(astar));
    }
    return BundleMapData(alpha.target(), alpha.source(), std::move(out), alpha.singular_points(),
                         alpha.injectivity_floor());
}

ConnectionData direct_sum(const ConnectionData& D1, const ConnectionData& D2) {
    if (D1.bundle()->base() != D2.bundle()->base())
        throw std::invalid_argument("direct_sum: base mismatch");
    if (D2.bundle()->rank() == 0) return D1;
    if (D1.bundle()->rank() == 0) return D2;
    auto bundle = std::make_shared<BundleData>(D1.bundle()->base(),
                                               D1.bundle()->rank() + D2.bundle()->rank(),
                                               D1.bundle()->complex_field());
    const auto& cover = *D1.bundle()->base();
    for (int i = 0; i < cover.chart_count(); ++i)
        for (int j = 0; j < cover.chart_count(); ++j) {
            const MatrixForm* g1 = D1.bundle()->transition(i, j);
            const MatrixForm* g2 = D2.bundle()->transition(i, j);
            if (g1 && g2) bundle->set_transition(i, j, block_diag(*g1, *g2));
        }
    std::vector<MatrixForm> omega;
    for (int i = 0; i < D1.chart_count(); ++i) omega.push_back(block_diag(D1.omega(i), D2.omega(i)));
    return ConnectionData(std::const_pointer_cast<const BundleData>(
                              std::shared_ptr<BundleData>(std::move(bundle))),
                          std::move(omega), -1.0);
}

ComplementConnection image_complement_connection(const BundleMapData& alpha,
                                                 const ConnectionData& D_F, const FiberMetric& hF,
                                                 int seed_offset) {
    const int rE = alpha.source()->rank();
    const int rF = alpha.target()->rank();
    if (rF <= rE) throw std::invalid_argument("image complement requires rank F > rank E");
    const int rp = rF - rE;
    const auto& cover = *alpha.source()->base();

    ComplementConnection out;
    for (int ic = 0; ic < cover.chart_count(); ++ic) {
        const Chart& c = *cover.chart(ic);
        MatrixForm Q(cover.chart(ic), rF, rp, 0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd A = mat_at(alpha.A(ic), n);
            Eigen::MatrixXcd hf = hF.is_identity() ? Eigen::MatrixXcd::Identity(rF, rF)
                                                   : mat_at(hF.h(ic), n);
            Eigen::MatrixXcd AhA = A.adjoint() * hf * A;
            const double floor2 = alpha.injectivity_floor() * alpha.injectivity_floor();
            if (AhA.jacobiSvd().singularValues().minCoeff() < floor2)
                throw std::runtime_error("image complement: map loses injectivity on region");
            Eigen::MatrixXcd P = A * AhA.inverse() * A.adjoint() * hf;
            Eigen::MatrixXcd Perp = Eigen::MatrixXcd::Identity(rF, rF) - P;
            // Gram-Schmidt in the hF inner product starting from coordinate seeds
            Eigen::MatrixXcd frame(rF, rp);
            int col = 0;
            for (int seed = 0; seed < rF && col < rp; ++seed) {
                Eigen::VectorXcd v = Perp.col((seed + seed_offset) % rF);
                for (int k = 0; k < col; ++k) {
                    const Eigen::VectorXcd q = frame.col(k);
                    v -= q * (q.adjoint() * hf * v)(0, 0);
                }
                const double norm = std::sqrt(std::abs((v.adjoint() * hf * v)(0, 0)));
                if (norm < 1e-8) continue; // degenerate seed, try the next one
                frame.col(col++) = v / norm;
            }
            if (col < rp) throw std::runtime_error("image complement: frame construction degenerate");
            set_mat(Q, n, frame);
        }
        out.frame.push_back(Q);

        // omega_perp = Q^H hF (dQ + omega_F Q)
        MatrixForm dQ = matrix_d(Q);
        MatrixForm QH(cover.chart(ic), rp, rF, 0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd q = mat_at(Q, n);
            Eigen::MatrixXcd hf = hF.is_identity() ? Eigen::MatrixXcd::Identity(rF, rF)
                                                   : mat_at(hF.h(ic), n);
            set_mat(QH, n, (q.adjoint() * hf).eval());
        }
        MatrixForm wQ = matrix_wedge(D_F.omega(ic), Q);
        dQ += wQ;
        out.omega.push_back(matrix_wedge(QH, dQ));
        out.curvature.push_back(curvature_of(out.omega.back()));

        // frame-free route: with Qp the projector onto the complement,
        //   R = Qp Omega_F Qp + Qp dQp^dQp Qp + Qp dQp^(1-Qp) w Qp - Qp w (1-Qp)^dQp Qp
        MatrixForm Qp(cover.chart(ic), rF, rF, 0);
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            Eigen::MatrixXcd q = mat_at(Q, n);
            Eigen::MatrixXcd hf = hF.is_identity() ? Eigen::MatrixXcd::Identity(rF, rF)
                                                   : mat_at(hF.h(ic), n);
            set_mat(Qp, n, (q * (q.adjoint() * hf)).eval());
        }
        MatrixForm dQp = matrix_d(Qp);
        MatrixForm comp = matrix_wedge(Qp, Qp); // placeholder shape, overwritten below
        {
            MatrixForm OmegaF = curvature_of(D_F.omega(ic));
            MatrixForm one_minus = MatrixForm::identity(cover.chart(ic), rF);
            one_minus -= Qp;
            const MatrixForm& w = D_F.omega(ic);
            MatrixForm term1 = matrix_wedge(matrix_wedge(Qp, OmegaF), Qp);
            MatrixForm term2 = matrix_wedge(matrix_wedge(Qp, matrix_wedge(dQp, dQp)), Qp);
            MatrixForm term3 =
                matrix_wedge(matrix_wedge(Qp, matrix_wedge(dQp, matrix_wedge(one_minus, w))), Qp);
            MatrixForm term4 =
                matrix_wedge(matrix_wedge(Qp, matrix_wedge(w, matrix_wedge(one_minus, dQp))), Qp);
            comp = term1;
            comp += term2;
            comp += term3;
            comp -= term4;
        }
        out.projected.push_back(std::move(comp));
    }
    return out;
}

PulledBundle pullback_bundle(const BundlePullbackInput& in, const CoverMap& f,
                             const std::vector<int>& reference_chart) {
    const int r = in.bundle->rank();
    const ManifoldCover& newbase = *f.domain;
    const ManifoldCover& oldbase = *f.target;
    const int nch = newbase.chart_count();

    auto bundle = std::make_shared<BundleData>(f.domain, r, in.bundle->complex_field());
    std::vector<MatrixForm> omega;

    std::vector<cplx> gbuf(static_cast<std::size_t>(r) * r);
    std::vector<cplx> wbuf;

    auto eval_transition = [&](int i, int j, const Point& xj, Eigen::MatrixXcd& g) {
        in.transition_fn(i, j, xj, gbuf);
        g.resize(r, r);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) g(a, b) = gbuf[a * r + b];
    };

    for (int i = 0; i < nch; ++i) {
        const Chart& c = *newbase.chart(i);
        const int dim = c.dim();
        const int ref = reference_chart[i];
        MatrixForm w(newbase.chart(i), r, r, 1);

        CubicInterpolator interp_ref(oldbase.chart(ref));
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            const auto& im = f.images[i][n];
            const Point x = c.coords(n);
            const int dim_old = oldbase.chart(im.chart)->dim();

            // omega of the source in the reference frame, in image-chart coords
            std::vector<Eigen::MatrixXcd> w_src(dim_old, Eigen::MatrixXcd::Zero(r, r));
            if (im.chart == ref) {
                CubicInterpolator interp(oldbase.chart(ref));
                const MatrixForm& wo = in.connection->omega(ref);
                for (int ax = 0; ax < dim_old; ++ax)
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b)
                            w_src[ax](a, b) = interp(wo.at(a, b).comp(ax), im.coords);
            } else {
                CubicInterpolator interp(oldbase.chart(im.chart));
                const MatrixForm& wo = in.connection->omega(im.chart);
                std::vector<Eigen::MatrixXcd> wc(dim_old, Eigen::MatrixXcd::Zero(r, r));
                for (int ax = 0; ax < dim_old; ++ax)
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b)
                            wc[ax](a, b) = interp(wo.at(a, b).comp(ax), im.coords);
                // transport to the reference frame: g wc g^-1 - dg g^-1,
                // dg by small-step central differences of the transition closure
                Eigen::MatrixXcd g;
                eval_transition(ref, im.chart, im.coords, g);
                Eigen::MatrixXcd ginv = g.inverse();
                const double step = 1e-5;
                for (int ax = 0; ax < dim_old; ++ax) {
                    Point xp = im.coords, xm = im.coords;
                    xp[ax] += step;
                    xm[ax] -= step;
                    Eigen::MatrixXcd gp, gm;
                    eval_transition(ref, im.chart, xp, gp);
                    eval_transition(ref, im.chart, xm, gm);
                    Eigen::MatrixXcd dg = (gp - gm) / (2.0 * step);
                    w_src[ax] = g * wc[ax] * ginv - dg * ginv;
                }
            }

            const auto J = f.jacobian(i, x, im.chart);
            for (int ax = 0; ax < dim; ++ax) {
                Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(r, r);
                for (int src = 0; src < dim_old; ++src) acc += w_src[src] * J[src][ax];
                for (int a = 0; a < r; ++a)
                    for (int b = 0; b < r; ++b) w.at(a, b).at(ax, n) = acc(a, b);
            }
        }
        omega.push_back(std::move(w));
    }

    // transitions of the pulled bundle between new charts
    for (int i = 0; i < nch; ++i)
        for (int j = 0; j < nch; ++j) {
            if (i == j) continue;
            const Transition* t = newbase.transition(i, j);
            if (!t) continue;
            const Chart& cj = *newbase.chart(j);
            MatrixForm g(newbase.chart(j), r, r, 0);
            bool any = false;
            for (std::size_t n = 0; n < cj.node_count(); ++n) {
                const Point x = cj.coords(n);
                if (t->defined && !t->defined(x)) {
                    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(r, r);
                    set_mat(g, n, id);
                    continue;
                }
                const auto& im = f.images[j][n];
                Eigen::MatrixXcd gi, gj;
                eval_transition(reference_chart[i], im.chart, im.coords, gi);
                eval_transition(reference_chart[j], im.chart, im.coords, gj);
                set_mat(g, n, (gi * gj.inverse()).eval());
                any = true;
            }
            if (any) bundle->set_transition(i, j, std::move(g));
        }

    PulledBundle out;
    out.bundle = bundle;
    out.connection = std::make_shared<ConnectionData>(out.bundle, std::move(omega), -1.0);
    return out;
}

} // namespace cw
