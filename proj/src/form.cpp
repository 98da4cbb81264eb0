#include "cw/form.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace cw {

namespace {

std::vector<std::vector<int>> build_combos(int dim, int p) {
    std::vector<std::vector<int>> out;
    if (p < 0 || p > dim) return out;
    std::vector<int> cur(p);
    std::function<void(int, int)> rec = [&](int start, int slot) {
        if (slot == p) {
            out.push_back(cur);
            return;
        }
        for (int a = start; a < dim; ++a) {
            cur[slot] = a;
            rec(a + 1, slot + 1);
        }
    };
    rec(0, 0);
    return out;
}

} // namespace

const std::vector<std::vector<int>>& index_combinations(int dim, int p) {
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dim, p);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_combos(dim, p)).first;
    return it->second;
}

int combination_rank(int dim, std::span<const int> combo) {
    const auto& all = index_combinations(dim, static_cast<int>(combo.size()));
    for (int r = 0; r < static_cast<int>(all.size()); ++r)
        if (std::equal(all[r].begin(), all[r].end(), combo.begin(), combo.end())) return r;
    throw std::logic_error("combination_rank: not found");
}

int insertion_sign(std::span<const int> I, int j) {
    int below = 0;
    for (int a : I) {
        if (a == j) return 0;
        if (a < j) ++below;
    }
    return (below % 2 == 0) ? 1 : -1;
}

int merge_sign(std::span<const int> I, std::span<const int> J, std::vector<int>& merged) {
    merged.clear();
    merged.reserve(I.size() + J.size());
    // count inversions while merging
    int sign = 1;
    std::size_t i = 0, j = 0;
    while (i < I.size() && j < J.size()) {
        if (I[i] == J[j]) return 0;
        if (I[i] < J[j]) {
            merged.push_back(I[i++]);
        } else {
            // J[j] hops over the remaining elements of I
            if ((I.size() - i) % 2 != 0) sign = -sign;
            merged.push_back(J[j++]);
        }
    }
    while (i < I.size()) merged.push_back(I[i++]);
    while (j < J.size()) merged.push_back(J[j++]);
    return sign;
}

DifferentialForm::DifferentialForm(ChartPtr chart, int degree)
    : chart_(std::move(chart)), degree_(degree) {
    if (!chart_) throw std::invalid_argument("form requires a chart");
    if (degree_ < 0) throw std::invalid_argument("negative form degree");
    if (degree_ > chart_->dim())
        throw std::invalid_argument("form degree exceeds chart dimension (use zero_overflow)");
    const auto& combos = index_combinations(chart_->dim(), degree_);
    comps_.assign(combos.size(), std::vector<cplx>(chart_->node_count(), cplx(0.0)));
}

DifferentialForm DifferentialForm::zero_overflow(ChartPtr chart, int degree) {
    DifferentialForm f;
    f.chart_ = std::move(chart);
    f.degree_ = degree;
    f.overflow_ = true;
    return f;
}

DifferentialForm DifferentialForm::sample_scalar(
    ChartPtr chart, const std::function<cplx(const std::array<double, kMaxDim>&)>& f) {
    DifferentialForm out(chart, 0);
    const Chart& c = *out.chart_;
    for (std::size_t n = 0; n < c.node_count(); ++n) out.comps_[0][n] = f(c.coords(n));
    return out;
}

DifferentialForm DifferentialForm::sample(
    ChartPtr chart, int degree,
    const std::function<cplx(int, const std::array<double, kMaxDim>&)>& f) {
    DifferentialForm out(chart, degree);
    const Chart& c = *out.chart_;
    for (int cc = 0; cc < out.component_count(); ++cc)
        for (std::size_t n = 0; n < c.node_count(); ++n) out.comps_[cc][n] = f(cc, c.coords(n));
    return out;
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& o) {
    if (o.overflow_) return *this;
    if (overflow_) { *this = o; return *this; }
    if (!chart_ || !o.chart_ || !chart_->same_grid(*o.chart_))
        throw ChartMismatch("form addition: chart mismatch");
    if (degree_ != o.degree_) throw std::invalid_argument("form addition: degree mismatch");
    for (std::size_t c = 0; c < comps_.size(); ++c)
        for (std::size_t n = 0; n < comps_[c].size(); ++n) comps_[c][n] += o.comps_[c][n];
    return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& o) {
    if (o.overflow_) return *this;
    DifferentialForm neg = o;
    neg *= cplx(-1.0);
    return *this += neg;
}

DifferentialForm& DifferentialForm::operator*=(cplx s) {
    for (auto& comp : comps_)
        for (auto& v : comp) v *= s;
    return *this;
}

double DifferentialForm::max_abs(const std::vector<uint8_t>* keep) const {
    double m = 0.0;
    for (const auto& comp : comps_)
        for (std::size_t n = 0; n < comp.size(); ++n) {
            if (keep && !(*keep)[n]) continue;
            m = std::max(m, std::abs(comp[n]));
        }
    return m;
}

bool DifferentialForm::is_zero(double tol) const { return overflow_ || max_abs() <= tol; }

std::vector<cplx> derivative_axis(const Chart& chart, const std::vector<cplx>& f, int axis) {
    const int n = chart.res(axis);
    const double h = chart.spacing(axis);
    std::vector<cplx> out(f.size());

    // stride of `axis` in the flat row-major layout
    std::size_t stride = 1;
    for (int a = chart.dim() - 1; a > axis; --a) stride *= chart.res(a);
    const std::size_t block = stride * n;

    for (std::size_t base = 0; base < f.size(); base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            auto id = [&](int i) { return base + off + static_cast<std::size_t>(i) * stride; };
            if (chart.periodic(axis)) {
                for (int i = 0; i < n; ++i) {
                    int ip = (i + 1) % n, im = (i + n - 1) % n;
                    out[id(i)] = (f[id(ip)] - f[id(im)]) / (2.0 * h);
                }
            } else {
                for (int i = 1; i < n - 1; ++i)
                    out[id(i)] = (f[id(i + 1)] - f[id(i - 1)]) / (2.0 * h);
                out[id(0)] = (-3.0 * f[id(0)] + 4.0 * f[id(1)] - f[id(2)]) / (2.0 * h);
                out[id(n - 1)] = (3.0 * f[id(n - 1)] - 4.0 * f[id(n - 2)] + f[id(n - 3)]) / (2.0 * h);
            }
        }
    }
    return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& f) {
    const ChartPtr& chart = f.chart();
    if (f.overflow() || f.degree() >= chart->dim())
        return DifferentialForm::zero_overflow(chart, f.degree() + 1);

    const int dim = chart->dim();
    const auto& in_combos = index_combinations(dim, f.degree());
    DifferentialForm out(chart, f.degree() + 1);

    for (int c = 0; c < static_cast<int>(in_combos.size()); ++c) {
        const auto& I = in_combos[c];
        for (int j = 0; j < dim; ++j) {
            int sign = insertion_sign(std::span<const int>(I.data(), I.size()), j);
            if (sign == 0) continue;
            std::vector<int> K(I.begin(), I.end());
            K.insert(std::upper_bound(K.begin(), K.end(), j), j);
            int rank = combination_rank(dim, std::span<const int>(K.data(), K.size()));
            auto d = derivative_axis(*chart, f.comp(c), j);
            auto& target = out.comp(rank);
            if (sign > 0)
                for (std::size_t n = 0; n < d.size(); ++n) target[n] += d[n];
            else
                for (std::size_t n = 0; n < d.size(); ++n) target[n] -= d[n];
        }
    }
    return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    if (!a.chart() || !b.chart() || !a.chart()->same_grid(*b.chart()))
        throw ChartMismatch("wedge: chart mismatch");
    const ChartPtr& chart = a.chart();
    const int dim = chart->dim();
    const int deg = a.degree() + b.degree();
    if (a.overflow() || b.overflow() || deg > dim) {
        if (deg > dim) {
            if (!a.overflow() && !b.overflow())
                throw std::invalid_argument("wedge: degree sum exceeds chart dimension");
            return DifferentialForm::zero_overflow(chart, deg);
        }
        return DifferentialForm::zero_overflow(chart, deg);
    }

    const auto& ca = index_combinations(dim, a.degree());
    const auto& cb = index_combinations(dim, b.degree());
    DifferentialForm out(chart, deg);
    std::vector<int> merged;
    for (int ia = 0; ia < static_cast<int>(ca.size()); ++ia) {
        for (int ib = 0; ib < static_cast<int>(cb.size()); ++ib) {
            int sign = merge_sign(std::span<const int>(ca[ia].data(), ca[ia].size()),
                                  std::span<const int>(cb[ib].data(), cb[ib].size()), merged);
            if (sign == 0) continue;
            int rank = combination_rank(dim, std::span<const int>(merged.data(), merged.size()));
            const auto& fa = a.comp(ia);
            const auto& fb = b.comp(ib);
            auto& target = out.comp(rank);
            const cplx s(static_cast<double>(sign));
            for (std::size_t n = 0; n < fa.size(); ++n) target[n] += s * fa[n] * fb[n];
        }
    }
    return out;
}

} // namespace cw
