#pragma once

#include "cw/cover.hpp"

namespace cw {

using CoverPtr = std::shared_ptr<const ManifoldCover>;

struct SingularPoint {
    int chart = 0;
    Point coords{};
};

/// Vector bundle over a cover, presented by per-chart frames and sampled
/// frame transitions g_ij (components in chart j map to chart i).
class BundleData {
public:
    BundleData(CoverPtr base, int rank, bool complex_field = true);

    const CoverPtr& base() const { return base_; }
    int rank() const { return rank_; }
    bool complex_field() const { return complex_; }

    void set_transition(int i, int j, MatrixForm g); // degree-0, sampled on chart j
    const MatrixForm* transition(int i, int j) const;

    /// Optional analytic transition closure g(i <- j)(x in chart j coords),
    /// row-major output. Used for validation and frame transport; the sampled
    /// fields remain the operational data.
    using TransitionFn = std::function<void(int i, int j, const Point&, std::vector<cplx>&)>;
    void set_transition_fn(TransitionFn fn) { transition_fn_ = std::move(fn); }
    const TransitionFn& transition_fn() const { return transition_fn_; }

    /// Cocycle probe: g_ij g_ji = 1 at overlap probe points, through the
    /// analytic closure when available (else interpolated samples). Throws
    /// beyond tolerance.
    void validate(double tol = 1e-8) const;

private:
    CoverPtr base_;
    int rank_;
    bool complex_;
    std::map<std::pair<int, int>, MatrixForm> transitions_;
    TransitionFn transition_fn_;
};

using BundlePtr = std::shared_ptr<const BundleData>;

/// Connection: one degree-1 matrix of forms per chart, compatible across
/// transitions up to the stated tolerance (checked at construction unless
/// skipped).
class ConnectionData {
public:
    ConnectionData(BundlePtr bundle, std::vector<MatrixForm> omega,
                   double compat_tol = -1.0); // tol < 0: skip the overlap check

    const BundlePtr& bundle() const { return bundle_; }
    const MatrixForm& omega(int chart) const { return omega_[chart]; }
    int chart_count() const { return static_cast<int>(omega_.size()); }

    double compatibility_residual() const { return compat_residual_; }

private:
    BundlePtr bundle_;
    std::vector<MatrixForm> omega_;
    double compat_residual_ = 0.0;
};

/// Fiber metric: per-chart Hermitian positive matrix fields.
class FiberMetric {
public:
    FiberMetric(BundlePtr bundle, std::vector<MatrixForm> h);
    static FiberMetric identity(BundlePtr bundle);

    const BundlePtr& bundle() const { return bundle_; }
    const MatrixForm& h(int chart) const { return h_[chart]; }
    bool is_identity() const { return identity_; }

private:
    BundlePtr bundle_;
    std::vector<MatrixForm> h_;
    bool identity_ = false;
};

/// Bundle map: per-chart sampled r_F x r_E matrix fields with declared
/// isolated singular points.
class BundleMapData {
public:
    BundleMapData(BundlePtr source, BundlePtr target, std::vector<MatrixForm> A,
                  std::vector<SingularPoint> singular_points = {},
                  double injectivity_floor = 1e-6);

    const BundlePtr& source() const { return source_; }
    const BundlePtr& target() const { return target_; }
    const MatrixForm& A(int chart) const { return A_[chart]; }
    const std::vector<SingularPoint>& singular_points() const { return sing_; }
    double injectivity_floor() const { return floor_; }

    /// Probe smallest singular value away from the declared singular points
    /// (mask radius in grid cells). Throws naming the offending node.
    void check_injectivity(double mask_radius_cells = 2.0) const;

    /// Probe the intertwining relation A_i g_ij = g^F_ij A_j at overlap points.
    void validate_intertwining(double tol = 1e-8) const;

private:
    BundlePtr source_, target_;
    std::vector<MatrixForm> A_;
    std::vector<SingularPoint> sing_;
    double floor_;
};

/// Per-chart curvature d(omega) + omega ^ omega.
std::vector<MatrixForm> curvature(const ConnectionData& D);

/// Adjoint bundle map A* = hE^{-1} A^H hF, reversing the direction.
BundleMapData adjoint(const BundleMapData& alpha, const FiberMetric& hE, const FiberMetric& hF);

/// Block-diagonal direct sum of connections over the same base.
ConnectionData direct_sum(const ConnectionData& D1, const ConnectionData& D2);

/// Whether a chart node lies within `cells` grid cells of a singular point.
std::vector<uint8_t> singular_mask(const Chart& chart, int chart_index,
                                   const std::vector<SingularPoint>& pts, double cells);

/// Smallest singular value of the map matrix at a node, in the metric sense.
double singular_value_floor_at(const BundleMapData& alpha, const FiberMetric& hE,
                               const FiberMetric& hF, int chart, std::size_t node);

/// Connection induced on the orthogonal complement of im(alpha) inside the
/// target bundle: frame by Gram-Schmidt from fixed coordinate seeds
/// (re-seeded where degenerate), omega compressed through the frame.
/// Returns the frame fields Q (r_F x r_perp per chart) and the connection
/// matrices in that frame.
struct ComplementConnection {
    std::vector<MatrixForm> frame;  // degree-0, r_F x r_perp
    std::vector<MatrixForm> omega;  // degree-1, r_perp x r_perp
    std::vector<MatrixForm> curvature; // degree-2, r_perp x r_perp
    // frame-free curvature endomorphism on the target fibers (r_F x r_F),
    // supported on the complement; invariant-polynomial evaluations use this,
    // which removes any dependence on the frame seeding
    std::vector<MatrixForm> projected;
};
ComplementConnection image_complement_connection(const BundleMapData& alpha,
                                                 const ConnectionData& D_F,
                                                 const FiberMetric& hF,
                                                 int seed_offset = 0);

/// A map into the base cover, sampled per chart of a (new) cover: every node
/// chooses a source chart and coordinates there.
struct CoverMap {
    struct NodeImage {
        int chart = 0;
        Point coords{};
    };
    CoverPtr domain;  // new base
    CoverPtr target;  // old base
    std::vector<std::vector<NodeImage>> images; // per domain chart, per node
    // analytic Jacobian of the map written in (domain chart, image chart) coords
    std::function<SampledMap::Jacobian(int dom_chart, const Point&, int img_chart)> jacobian;
};

/// Pullback of (bundle, connection, metric) through a map between bases.
/// Each new chart re-expresses everything in the frame of one reference
/// source chart; where images land in another source chart the fields are
/// transported through analytic transition closures supplied here.
struct BundlePullbackInput {
    BundlePtr bundle;
    const ConnectionData* connection = nullptr;
    // analytic transitions of the source bundle: g(i <- j)(point in chart j coords)
    std::function<void(int i, int j, const Point& xj, std::vector<cplx>& g)> transition_fn;
    // analytic connection forms: omega_i(point in chart i coords), row-major [r][r][dim]
    std::function<void(int i, const Point& xi, std::vector<cplx>& omega)> omega_fn;
};
struct PulledBundle {
    BundlePtr bundle;
    std::shared_ptr<ConnectionData> connection;
};
PulledBundle pullback_bundle(const BundlePullbackInput& in, const CoverMap& f,
                             const std::vector<int>& reference_chart);

} // namespace cw
