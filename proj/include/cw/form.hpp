#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "cw/chart.hpp"

namespace cw {

using cplx = std::complex<double>;

/// Strictly increasing multi-indices of size p drawn from {0..dim-1},
/// in lexicographic order. Cached per (dim, p).
const std::vector<std::vector<int>>& index_combinations(int dim, int p);

/// Position of a sorted multi-index in index_combinations(dim, p).
int combination_rank(int dim, std::span<const int> combo);

/// Sign of sorting axis j into the increasing multi-index I (j not in I);
/// 0 if j occurs in I.
int insertion_sign(std::span<const int> I, int j);

/// Shuffle sign merging two disjoint increasing multi-indices; 0 if they collide.
int merge_sign(std::span<const int> I, std::span<const int> J, std::vector<int>& merged);

/// Degree-p form on a chart grid: one complex coefficient field per
/// increasing multi-index. A form whose degree exceeds the chart dimension
/// is kept as an explicit identically-zero marker.
class DifferentialForm {
public:
    DifferentialForm() = default;
    DifferentialForm(ChartPtr chart, int degree);

    static DifferentialForm zero_overflow(ChartPtr chart, int degree);

    /// Sample a 0-form from a callable on coordinates.
    static DifferentialForm sample_scalar(
        ChartPtr chart, const std::function<cplx(const std::array<double, kMaxDim>&)>& f);

    /// Sample a degree-p form: callable returns the coefficient for component c.
    static DifferentialForm sample(
        ChartPtr chart, int degree,
        const std::function<cplx(int comp, const std::array<double, kMaxDim>&)>& f);

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return degree_; }
    bool overflow() const { return overflow_; }
    int component_count() const { return static_cast<int>(comps_.size()); }

    std::vector<cplx>& comp(int c) { return comps_[c]; }
    const std::vector<cplx>& comp(int c) const { return comps_[c]; }

    cplx& at(int c, std::size_t node) { return comps_[c][node]; }
    cplx at(int c, std::size_t node) const { return comps_[c][node]; }

    DifferentialForm& operator+=(const DifferentialForm& o);
    DifferentialForm& operator-=(const DifferentialForm& o);
    DifferentialForm& operator*=(cplx s);
    friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
    friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
    friend DifferentialForm operator*(cplx s, DifferentialForm a) { return a *= s; }

    /// Max coefficient magnitude, optionally restricted by a node mask
    /// (mask true = keep).
    double max_abs(const std::vector<uint8_t>* keep = nullptr) const;

    bool is_zero(double tol = 0.0) const;

private:
    ChartPtr chart_;
    int degree_ = 0;
    bool overflow_ = false;
    std::vector<std::vector<cplx>> comps_;
};

/// Second-order derivative of a sampled scalar field along one axis:
/// central in the interior and on periodic axes, one-sided second order
/// at non-periodic boundaries.
std::vector<cplx> derivative_axis(const Chart& chart, const std::vector<cplx>& f, int axis);

/// Exterior derivative. Degree dim input yields the flagged zero form of
/// unrepresentable degree.
DifferentialForm exterior_derivative(const DifferentialForm& f);

/// Pointwise antisymmetrized product with shuffle signs.
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);

} // namespace cw
