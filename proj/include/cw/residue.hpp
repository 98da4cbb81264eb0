#pragma once

#include "cw/transgression.hpp"

namespace cw {

double smoothstep_quintic(double u);   // 0 -> 1, C^2 at the seam
double smoothstep_septic(double u);    // 0 -> 1, C^3 at the seam

/// Radial profiles for normalization in an epsilon-ball: lambda drives the
/// bundle collapse (0 inside eps/2, 1 outside eps), and the radius map
/// m(t) = t l(t) projects onto the eps/2 sphere inside (l(t) = 1/t in the
/// unit-normalized radial variable of the tubular neighborhood, l = 1
/// outside the ball).
struct NormalizationProfile {
    double eps = 0.6;

    double lambda(double t) const;
    double lambda_prime(double t) const;
    double radius_map(double t) const; // m(t) = t * l(t)
    double l(double t) const { return t > 0 ? radius_map(t) / t : 0.0; }

    /// Endpoint values exact, monotonicity sampled on a fine grid.
    void validate() const;
};

/// Pull a connection back through the radial collapse at a point: radially
/// constant (flat) inside the eps/2 ball, untouched outside the eps ball.
ConnectionData normalize_connection(const ConnectionData& D, int chart, const Point& p,
                                    const NormalizationProfile& prof);

/// Compose a bundle map with the radial projection at a point: radially
/// constant in the punctured eps/2 ball, bit-identical outside the eps ball.
BundleMapData normalize_map(const BundleMapData& alpha, int chart, const Point& p,
                            const NormalizationProfile& prof);

/// Max radial variation of a degree-0 matrix field along rays near a point
/// (radial-constancy check for normalized maps).
double radial_variation(const MatrixForm& field, const Point& p, double r_lo, double r_hi,
                        int rays = 32, int steps = 5);

enum class ResidueStatus { structural_zero, plateau, extrapolated, not_extendable };

struct SingularityRecord {
    int chart = 0;
    Point point{};
    std::vector<double> eps_list;
    std::vector<cplx> per_eps;
    cplx extrapolated{};
    ResidueStatus status = ResidueStatus::plateau;
    double spread = 0.0;          // relative spread of the per-eps values
    int degree_bookkeeping = 0;   // 2 deg(phi) - codim
};

struct ResidueOptions {
    std::vector<double> eps_list{0.29, 0.235, 0.18};
    double plateau_tol = 1e-2;
    double imag_tol = 1e-6;
    int sphere_resolution = 512;
};

/// Sphere integrals of T on shrinking spheres around an isolated point,
/// oriented as the boundary of the complement (so a simple positively
/// wound zero of a section carries residue +1), with plateau detection and
/// an even-power extrapolation fallback.
SingularityRecord compute_residue(const TransgressionField& T, int chart, const Point& p,
                                  const ResidueOptions& opts, int phi_degree);

} // namespace cw
