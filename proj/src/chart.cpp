#include "cw/chart.hpp"

namespace cw {

Chart::Chart(std::string name, int dim,
             std::array<double, kMaxDim> lo, std::array<double, kMaxDim> hi,
             std::array<int, kMaxDim> res, std::array<bool, kMaxDim> periodic)
    : name_(std::move(name)), dim_(dim), lo_(lo), hi_(hi), res_(res), periodic_(periodic) {
    if (dim_ < 1 || dim_ > kMaxDim)
        throw std::invalid_argument("chart dimension must be in [1," + std::to_string(kMaxDim) + "]");
    for (int a = 0; a < dim_; ++a) {
        if (res_[a] < 8)
            throw std::invalid_argument("chart '" + name_ + "': resolution below minimum 8 on axis " +
                                        std::to_string(a));
        if (!(hi_[a] > lo_[a]))
            throw std::invalid_argument("chart '" + name_ + "': empty box on axis " + std::to_string(a));
        h_[a] = periodic_[a] ? (hi_[a] - lo_[a]) / res_[a]
                             : (hi_[a] - lo_[a]) / (res_[a] - 1);
        nodes_ *= res_[a];
    }
}

Chart Chart::box(std::string name, int dim, double half_width, int res) {
    std::array<double, kMaxDim> lo{}, hi{};
    std::array<int, kMaxDim> n{};
    std::array<bool, kMaxDim> per{};
    for (int a = 0; a < dim; ++a) {
        lo[a] = -half_width;
        hi[a] = half_width;
        n[a] = res;
        per[a] = false;
    }
    return Chart(std::move(name), dim, lo, hi, n, per);
}

bool Chart::contains(const std::array<double, kMaxDim>& x, double slack) const {
    for (int a = 0; a < dim_; ++a) {
        if (periodic_[a]) continue;
        if (x[a] < lo_[a] - slack || x[a] > hi_[a] + slack) return false;
    }
    return true;
}

bool Chart::same_grid(const Chart& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (lo_[a] != o.lo_[a] || hi_[a] != o.hi_[a] || res_[a] != o.res_[a] ||
            periodic_[a] != o.periodic_[a])
            return false;
    return true;
}

} // namespace cw
