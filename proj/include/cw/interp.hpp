#pragma once

#include "cw/form.hpp"

namespace cw {

/// Separable cubic Lagrange interpolation on the chart grid (third order),
/// 4-point stencil per axis, clamped at non-periodic boundaries and wrapped
/// on periodic ones.
class CubicInterpolator {
public:
    explicit CubicInterpolator(ChartPtr chart);

    /// Interpolate a sampled scalar field at x. The point must lie in the
    /// chart box (within `slack`) on non-periodic axes.
    cplx operator()(const std::vector<cplx>& field, const std::array<double, kMaxDim>& x) const;

    /// True when x is inside the box on all non-periodic axes.
    bool in_domain(const std::array<double, kMaxDim>& x, double slack = 1e-9) const;

private:
    ChartPtr chart_;
};

} // namespace cw
