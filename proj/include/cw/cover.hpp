#pragma once

#include <functional>
#include <map>
#include <optional>

#include "cw/interp.hpp"
#include "cw/matrix_form.hpp"

namespace cw {

using Point = std::array<double, kMaxDim>;
using PointMap = std::function<Point(const Point&)>;

/// Smooth map into a chart, sampled on a (different) chart's grid.
/// Jacobians come from an analytic callable when provided, else from
/// second-order finite differences of the samples.
class SampledMap {
public:
    using Jacobian = std::array<std::array<double, kMaxDim>, kMaxDim>; // J[i][j] = d map_i / d x_j

    SampledMap(ChartPtr domain, ChartPtr target, const PointMap& f,
               std::function<Jacobian(const Point&)> jac = nullptr);

    const ChartPtr& domain() const { return domain_; }
    const ChartPtr& target() const { return target_; }
    const Point& value(std::size_t node) const { return values_[node]; }
    Jacobian jacobian(std::size_t node) const;

private:
    ChartPtr domain_, target_;
    std::vector<Point> values_;
    std::function<Jacobian(const Point&)> jac_;
};

/// Chain-rule pullback of a form through a sampled map, interpolating the
/// source coefficients (third order). Throws if any image escapes the
/// source chart.
DifferentialForm pullback(const DifferentialForm& f, const SampledMap& phi);
MatrixForm pullback(const MatrixForm& m, const SampledMap& phi);

/// Coordinate transition between two charts of a cover.
struct Transition {
    PointMap map;                                          // chart j coords -> chart i coords
    std::function<SampledMap::Jacobian(const Point&)> jac; // optional analytic Jacobian
    std::function<bool(const Point&)> defined;             // overlap membership test (domain side)
};

/// Finite atlas with a partition of unity. Partition weights are sampled
/// 0-forms; at points covered by several charts the weights of all covering
/// charts sum to 1.
class ManifoldCover {
public:
    ManifoldCover(std::vector<ChartPtr> charts, std::vector<DifferentialForm> partition);

    int chart_count() const { return static_cast<int>(charts_.size()); }
    const ChartPtr& chart(int i) const { return charts_[i]; }
    const DifferentialForm& partition(int i) const { return partition_[i]; }

    void set_transition(int i, int j, Transition t); // map from chart j into chart i
    const Transition* transition(int i, int j) const;

    /// Checks partition positivity/normalization and mutual inverse of
    /// transitions on probe points. Throws on violation.
    void validate(double partition_tol = 1e-10, double inverse_tol = 1e-6) const;

private:
    std::vector<ChartPtr> charts_;
    std::vector<DifferentialForm> partition_;
    std::map<std::pair<int, int>, Transition> transitions_;
};

/// Partition-of-unity weighted Riemann sum of per-chart top-degree forms.
/// Summation order is fixed: charts in order, then nodes lexicographically.
cplx integrate(const ManifoldCover& cover, const std::vector<DifferentialForm>& forms);

/// Per-axis quadrature weight of a node (trapezoid ends on non-periodic axes).
double node_weight(const Chart& chart, const std::array<int, kMaxDim>& idx);

/// Boundary sphere of a small ball around a chart point.
struct SpherePatch {
    ChartPtr chart;
    Point center;
    double radius = 0.0;
    int sphere_resolution = 256; // nodes for the periodic angle; polar angles use half

    SpherePatch(ChartPtr c, Point ctr, double r, int res = 256);
};

/// Integral over the epsilon-sphere of a (dim-1)-form: analytic pullback
/// through the standard angle parametrization, coefficients interpolated at
/// third order, Riemann sum over the angular grid. Orientation is
/// outward-normal-first (counterclockwise circles in 2-D).
cplx sphere_integrate(const DifferentialForm& f, const SpherePatch& sphere);

} // namespace cw
