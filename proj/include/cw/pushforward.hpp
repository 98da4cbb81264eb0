#pragma once

#include "cw/bundle.hpp"

namespace cw {

/// Monotone profile with chi(0) = 0 and chi(infinity) = 1, supplied with its
/// derivative; smooths the pointwise inverse of a bundle map into a family.
struct ApproximateOne {
    std::function<double(double)> chi;
    std::function<double(double)> dchi;

    static ApproximateOne rational(); // t / (1 + t)

    /// Checks the endpoint and monotonicity conditions on a log-spaced grid.
    void validate() const;
};

/// Bundle map together with evaluation masks (nodes excluded around declared
/// singular points).
struct MaskedBundleMap {
    BundleMapData map;
    std::vector<std::vector<uint8_t>> keep; // per chart, 1 = valid
};

/// Pointwise (alpha* alpha)^-1 alpha*. Defined off the singular mask;
/// undeclared near-singularities raise an error naming the node.
MaskedBundleMap beta(const BundleMapData& alpha, const FiberMetric& hE, const FiberMetric& hF,
                     double mask_cells = 2.0);

/// Smoothed inverse beta_s = alpha* . m_s(alpha alpha*), m_s(t) = chi(t/s^2)/t
/// applied spectrally; smooth across the singular set for every s > 0.
std::vector<MatrixForm> beta_s(const BundleMapData& alpha, double s, const ApproximateOne& chi,
                               const FiberMetric& hE, const FiberMetric& hF);

/// d beta_s / d s = alpha* . n_s(alpha alpha*), n_s(t) = -2 chi'(t/s^2) / s^3.
std::vector<MatrixForm> beta_s_dot(const BundleMapData& alpha, double s, const ApproximateOne& chi,
                                   const FiberMetric& hE, const FiberMetric& hF);

/// One-parameter family of connections with generators for omega_s and its
/// s-derivative. The parameter runs over (0, infinity) compactified through
/// s = u/(1-u) unless an explicit finite interval is set.
class ConnectionFamily {
public:
    enum class Domain { compactified_half_line, interval };

    ConnectionFamily(BundlePtr bundle,
                     std::function<std::vector<MatrixForm>(double)> omega_at,
                     std::function<std::vector<MatrixForm>(double)> omega_dot_at,
                     Domain domain = Domain::compactified_half_line,
                     double a = 0.0, double b = 1.0);

    const BundlePtr& bundle() const { return bundle_; }
    std::vector<MatrixForm> omega(double s) const { return omega_at_(s); }
    std::vector<MatrixForm> omega_dot(double s) const { return omega_dot_at_(s); }
    Domain domain() const { return domain_; }
    double a() const { return a_; }
    double b() const { return b_; }

    /// Residual of omega_dot against centered differences in s (relative).
    double check_derivative(double s, double rel_step = 1e-4) const;

private:
    BundlePtr bundle_;
    std::function<std::vector<MatrixForm>(double)> omega_at_, omega_dot_at_;
    Domain domain_;
    double a_, b_;
};

/// Pushforward family omega_s = omega_F - (d alpha + omega_F alpha -
/// alpha omega_E) beta_s on the target bundle. The local formula is the
/// expansion of alpha D_E(beta_s v) + D_F(v - alpha beta_s v).
ConnectionFamily pushforward_family(const BundleMapData& alpha, const ConnectionData& D_E,
                                    const ConnectionData& D_F, const ApproximateOne& chi,
                                    const FiberMetric& hE, const FiberMetric& hF);

/// Mirror family for surjective maps: omega_s = omega_E + (beta_s omega_F -
/// d beta_s - omega_E beta_s) alpha on the source bundle; endpoints D_E and
/// the direct sum of D_F with the kernel connection.
ConnectionFamily pullback_family(const BundleMapData& alpha, const ConnectionData& D_E,
                                 const ConnectionData& D_F, const ApproximateOne& chi,
                                 const FiberMetric& hE, const FiberMetric& hF);

/// Kernel-bundle connection P_K D_E P_K for a surjective map (frame-free
/// projected curvature, mirror of the image complement).
std::vector<MatrixForm> kernel_projected_curvature(const BundleMapData& alpha,
                                                   const ConnectionData& D_E,
                                                   const FiberMetric& hE, const FiberMetric& hF);

inline constexpr double kSMax = 1e6; // stand-in for the infinite endpoint

} // namespace cw
