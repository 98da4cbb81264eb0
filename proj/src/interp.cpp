#include "cw/interp.hpp"

#include <cmath>

namespace cw {

CubicInterpolator::CubicInterpolator(ChartPtr chart) : chart_(std::move(chart)) {}

bool CubicInterpolator::in_domain(const std::array<double, kMaxDim>& x, double slack) const {
    return chart_->contains(x, slack);
}

cplx CubicInterpolator::operator()(const std::vector<cplx>& field,
                                   const std::array<double, kMaxDim>& x) const {
    const Chart& c = *chart_;
    const int dim = c.dim();

    int base[kMaxDim];
    double w[kMaxDim][4];
    for (int a = 0; a < dim; ++a) {
        const int n = c.res(a);
        const double h = c.spacing(a);
        double g = (x[a] - c.lo(a)) / h;
        if (c.periodic(a)) {
            g = g - std::floor(g / n) * n;
            base[a] = static_cast<int>(std::floor(g)) - 1;
        } else {
            if (g < -1e-9 || g > n - 1 + 1e-9)
                throw std::out_of_range("interpolation point escapes chart '" + c.name() + "'");
            g = std::min(std::max(g, 0.0), static_cast<double>(n - 1));
            base[a] = static_cast<int>(std::floor(g)) - 1;
            base[a] = std::max(0, std::min(base[a], n - 4));
        }
        const double t = g - base[a];
        // cubic Lagrange weights at stencil offsets 0..3
        w[a][0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        w[a][1] = t * (t - 2.0) * (t - 3.0) / 2.0;
        w[a][2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
        w[a][3] = t * (t - 1.0) * (t - 2.0) / 6.0;
    }

    cplx acc(0.0);
    int taps = 1;
    for (int a = 0; a < dim; ++a) taps *= 4;
    std::array<int, kMaxDim> idx{};
    for (int t = 0; t < taps; ++t) {
        int rem = t;
        double weight = 1.0;
        for (int a = 0; a < dim; ++a) {
            const int o = rem & 3;
            rem >>= 2;
            weight *= w[a][o];
            int i = base[a] + o;
            if (c.periodic(a)) {
                const int n = c.res(a);
                i = ((i % n) + n) % n;
            }
            idx[a] = i;
        }
        acc += weight * field[c.index(idx)];
    }
    return acc;
}

} // namespace cw
