#include "cw/cover.hpp"

#include <cmath>

namespace cw {

namespace {

double submatrix_det(const SampledMap::Jacobian& J, std::span<const int> rows,
                     std::span<const int> cols) {
    const int p = static_cast<int>(rows.size());
    switch (p) {
        case 0: return 1.0;
        case 1: return J[rows[0]][cols[0]];
        case 2:
            return J[rows[0]][cols[0]] * J[rows[1]][cols[1]] -
                   J[rows[0]][cols[1]] * J[rows[1]][cols[0]];
        default: {
            // Laplace expansion along the first row (p <= 4)
            double det = 0.0;
            std::vector<int> sub(rows.begin() + 1, rows.end());
            std::vector<int> rem;
            rem.reserve(p - 1);
            double sign = 1.0;
            for (int c = 0; c < p; ++c) {
                rem.clear();
                for (int cc = 0; cc < p; ++cc)
                    if (cc != c) rem.push_back(cols[cc]);
                det += sign * J[rows[0]][cols[c]] *
                       submatrix_det(J, std::span<const int>(sub.data(), sub.size()),
                                     std::span<const int>(rem.data(), rem.size()));
                sign = -sign;
            }
            return det;
        }
    }
}

} // namespace

SampledMap::SampledMap(ChartPtr domain, ChartPtr target, const PointMap& f,
                       std::function<Jacobian(const Point&)> jac)
    : domain_(std::move(domain)), target_(std::move(target)), jac_(std::move(jac)) {
    values_.resize(domain_->node_count());
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] = f(domain_->coords(n));
}

SampledMap::Jacobian SampledMap::jacobian(std::size_t node) const {
    if (jac_) return jac_(domain_->coords(node));
    Jacobian J{};
    const Chart& c = *domain_;
    auto idx = c.unindex(node);
    for (int ax = 0; ax < c.dim(); ++ax) {
        const int n = c.res(ax);
        const double h = c.spacing(ax);
        auto shifted = [&](int delta) {
            auto id = idx;
            id[ax] += delta;
            if (c.periodic(ax)) id[ax] = ((id[ax] % n) + n) % n;
            return values_[c.index(id)];
        };
        const int i = idx[ax];
        for (int out = 0; out < target_->dim(); ++out) {
            double d;
            if (c.periodic(ax) || (i > 0 && i < n - 1)) {
                d = (shifted(+1)[out] - shifted(-1)[out]) / (2.0 * h);
            } else if (i == 0) {
                d = (-3.0 * values_[node][out] + 4.0 * shifted(+1)[out] - shifted(+2)[out]) / (2.0 * h);
            } else {
                d = (3.0 * values_[node][out] - 4.0 * shifted(-1)[out] + shifted(-2)[out]) / (2.0 * h);
            }
            J[out][ax] = d;
        }
    }
    return J;
}

DifferentialForm pullback(const DifferentialForm& f, const SampledMap& phi) {
    if (!f.chart()->same_grid(*phi.target()))
        throw ChartMismatch("pullback: form lives on a different chart than the map target");
    const ChartPtr& dom = phi.domain();
    const int p = f.degree();
    if (f.overflow() || p > dom->dim()) return DifferentialForm::zero_overflow(dom, p);

    CubicInterpolator interp(f.chart());
    const auto& src_combos = index_combinations(f.chart()->dim(), p);
    const auto& dst_combos = index_combinations(dom->dim(), p);

    // bail out early with a clear error if any image escapes the source box
    for (std::size_t n = 0; n < dom->node_count(); ++n)
        if (!interp.in_domain(phi.value(n)))
            throw std::out_of_range("pullback: image escapes chart '" + f.chart()->name() + "'");

    DifferentialForm out(dom, p);
    std::vector<cplx> coeffs(src_combos.size());
    for (std::size_t n = 0; n < dom->node_count(); ++n) {
        const Point& y = phi.value(n);
        for (std::size_t c = 0; c < src_combos.size(); ++c) coeffs[c] = interp(f.comp(c), y);
        const auto J = phi.jacobian(n);
        for (std::size_t dj = 0; dj < dst_combos.size(); ++dj) {
            cplx acc(0.0);
            for (std::size_t si = 0; si < src_combos.size(); ++si) {
                const double det = submatrix_det(
                    J, std::span<const int>(src_combos[si].data(), src_combos[si].size()),
                    std::span<const int>(dst_combos[dj].data(), dst_combos[dj].size()));
                acc += coeffs[si] * det;
            }
            out.at(static_cast<int>(dj), n) = acc;
        }
    }
    return out;
}

MatrixForm pullback(const MatrixForm& m, const SampledMap& phi) {
    MatrixForm out(phi.domain(), m.rows(), m.cols(), m.degree());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out.at(i, j) = pullback(m.at(i, j), phi);
    return out;
}

ManifoldCover::ManifoldCover(std::vector<ChartPtr> charts, std::vector<DifferentialForm> partition)
    : charts_(std::move(charts)), partition_(std::move(partition)) {
    if (charts_.empty()) throw std::invalid_argument("cover needs at least one chart");
    if (partition_.size() != charts_.size())
        throw std::invalid_argument("cover: one partition weight field per chart");
    for (std::size_t i = 0; i < charts_.size(); ++i)
        if (partition_[i].degree() != 0 || !partition_[i].chart()->same_grid(*charts_[i]))
            throw std::invalid_argument("cover: partition must be 0-forms on their charts");
}

void ManifoldCover::set_transition(int i, int j, Transition t) {
    transitions_[{i, j}] = std::move(t);
}

const Transition* ManifoldCover::transition(int i, int j) const {
    auto it = transitions_.find({i, j});
    return it == transitions_.end() ? nullptr : &it->second;
}

void ManifoldCover::validate(double partition_tol, double inverse_tol) const {
    for (int i = 0; i < chart_count(); ++i) {
        const Chart& c = *charts_[i];
        for (std::size_t n = 0; n < c.node_count(); ++n) {
            const double w = partition_[i].at(0, n).real();
            if (w < -partition_tol || std::abs(partition_[i].at(0, n).imag()) > partition_tol)
                throw std::runtime_error("cover: partition weight negative or non-real");
            if (w > 1.0 + partition_tol) throw std::runtime_error("cover: partition weight above 1");
        }
    }
    // mutual-inverse probe of transitions
    for (const auto& [key, t] : transitions_) {
        auto [i, j] = key;
        const Transition* back = transition(j, i);
        if (!back) continue;
        const Chart& cj = *charts_[j];
        const std::size_t step = std::max<std::size_t>(1, cj.node_count() / 64);
        for (std::size_t n = 0; n < cj.node_count(); n += step) {
            const Point x = cj.coords(n);
            if (t.defined && !t.defined(x)) continue;
            const Point y = t.map(x);
            if (!charts_[i]->contains(y, 1e-9)) continue;
            if (back->defined && !back->defined(y)) continue;
            const Point xr = back->map(y);
            for (int a = 0; a < cj.dim(); ++a)
                if (std::abs(xr[a] - x[a]) > inverse_tol)
                    throw std::runtime_error("cover: transitions are not mutually inverse");
        }
    }
}

double node_weight(const Chart& chart, const std::array<int, kMaxDim>& idx) {
    double w = 1.0;
    for (int a = 0; a < chart.dim(); ++a) {
        double wa = chart.spacing(a);
        if (!chart.periodic(a) && (idx[a] == 0 || idx[a] == chart.res(a) - 1)) wa *= 0.5;
        w *= wa;
    }
    return w;
}

cplx integrate(const ManifoldCover& cover, const std::vector<DifferentialForm>& forms) {
    if (static_cast<int>(forms.size()) != cover.chart_count())
        throw std::invalid_argument("integrate: one form per chart");
    cplx total(0.0);
    for (int i = 0; i < cover.chart_count(); ++i) {
        const Chart& c = *cover.chart(i);
        const DifferentialForm& f = forms[i];
        if (f.overflow() || f.degree() != c.dim())
            throw std::invalid_argument("integrate: form degree must equal chart dimension");
        const auto& w = cover.partition(i).comp(0);
        const auto& coeff = f.comp(0);
        cplx chart_sum(0.0);
        for (std::size_t n = 0; n < c.node_count(); ++n)
            chart_sum += w[n] * coeff[n] * node_weight(c, c.unindex(n));
        total += chart_sum;
    }
    return total;
}

SpherePatch::SpherePatch(ChartPtr c, Point ctr, double r, int res)
    : chart(std::move(c)), center(ctr), radius(r), sphere_resolution(res) {
    if (radius <= 0.0) throw std::invalid_argument("sphere radius must be positive");
    for (int a = 0; a < chart->dim(); ++a) {
        if (chart->periodic(a)) continue;
        if (center[a] - radius < chart->lo(a) || center[a] + radius > chart->hi(a))
            throw std::out_of_range("sphere exits chart box");
    }
}

cplx sphere_integrate(const DifferentialForm& f, const SpherePatch& sphere) {
    const Chart& c = *sphere.chart;
    const int dim = c.dim();
    if (dim < 2) throw std::invalid_argument("sphere_integrate needs dim >= 2");
    if (f.overflow()) return cplx(0.0);
    if (!f.chart()->same_grid(c)) throw ChartMismatch("sphere_integrate: chart mismatch");
    if (f.degree() != dim - 1)
        throw std::invalid_argument("sphere_integrate: form degree must be dim - 1");

    CubicInterpolator interp(sphere.chart);
    const auto& combos = index_combinations(dim, dim - 1);
    const double eps = sphere.radius;

    const int m_per = sphere.sphere_resolution;           // periodic angle nodes
    const int m_pol = std::max(9, m_per / 2 + 1);         // polar angle nodes (trapezoid)

    // angle grid sizes per sphere dimension: dim-2 polar angles + 1 periodic
    std::array<int, kMaxDim> nang{};
    const int nangles = dim - 1;
    for (int a = 0; a < nangles - 1; ++a) nang[a] = m_pol;
    nang[nangles - 1] = m_per;

    std::size_t total = 1;
    for (int a = 0; a < nangles; ++a) total *= nang[a];

    cplx acc(0.0);
    std::array<int, kMaxDim> ia{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = nangles - 1; a >= 0; --a) {
            ia[a] = static_cast<int>(rem % nang[a]);
            rem /= nang[a];
        }
        double ang[kMaxDim];
        double wquad = 1.0;
        for (int a = 0; a < nangles - 1; ++a) {
            const double hpol = M_PI / (nang[a] - 1);
            ang[a] = ia[a] * hpol;
            wquad *= (ia[a] == 0 || ia[a] == nang[a] - 1) ? hpol * 0.5 : hpol;
        }
        ang[nangles - 1] = ia[nangles - 1] * (2.0 * M_PI / nang[nangles - 1]);
        wquad *= 2.0 * M_PI / nang[nangles - 1];

        // position and tangents of the standard parametrization
        // x_1 = cos a1, x_2 = sin a1 cos a2, ..., x_d = sin a1 ... sin a_{d-1}
        // (for dim 2 this is the counterclockwise circle)
        double dir[kMaxDim];
        double tang[kMaxDim][kMaxDim]; // tang[k][i] = d dir_i / d ang_k
        {
            double sinprod[kMaxDim + 1];
            sinprod[0] = 1.0;
            for (int a = 0; a < nangles; ++a) sinprod[a + 1] = sinprod[a] * std::sin(ang[a]);
            auto coord = [&](int i) {
                // i in 0..dim-1
                if (i < nangles) return sinprod[i] * std::cos(ang[i]);
                return sinprod[nangles];
            };
            for (int i = 0; i < dim; ++i) dir[i] = coord(i);
            for (int k = 0; k < nangles; ++k)
                for (int i = 0; i < dim; ++i) {
                    // derivative of coord(i) w.r.t. ang[k]
                    double v;
                    if (i < k) {
                        v = 0.0;
                    } else if (i == k) {
                        v = -sinprod[k] * std::sin(ang[k]);
                    } else {
                        // coord(i) contains sin(ang[k]) once as a factor
                        double base = (i < nangles) ? sinprod[i] * std::cos(ang[i]) : sinprod[nangles];
                        double s = std::sin(ang[k]);
                        v = (std::abs(s) > 1e-14) ? base * std::cos(ang[k]) / s : 0.0;
                        if (std::abs(s) <= 1e-14) {
                            // recompute product without the sin(ang[k]) factor
                            double prod = 1.0;
                            for (int a = 0; a < ((i < nangles) ? i : nangles); ++a)
                                if (a != k) prod *= std::sin(ang[a]);
                            if (i < nangles) prod *= std::cos(ang[i]);
                            v = prod * std::cos(ang[k]);
                        }
                    }
                    tang[k][i] = v;
                }
        }

        // flip for 2-D: standard (cos, sin) circle is x=cos(a1), y=sin(a1),
        // handled by the generic formulas with dir=(cos a1, sin a1).
        Point x{};
        for (int i = 0; i < dim; ++i) x[i] = sphere.center[i] + eps * dir[i];

        SampledMap::Jacobian J{};
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < nangles; ++k) J[i][k] = eps * tang[k][i];

        cplx val(0.0);
        std::vector<int> cols(nangles);
        for (int k = 0; k < nangles; ++k) cols[k] = k;
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            const double det = submatrix_det(
                J, std::span<const int>(combos[ci].data(), combos[ci].size()),
                std::span<const int>(cols.data(), cols.size()));
            if (det == 0.0) continue;
            val += interp(f.comp(static_cast<int>(ci)), x) * det;
        }
        acc += wquad * val;
    }
    return acc;
}

} // namespace cw
