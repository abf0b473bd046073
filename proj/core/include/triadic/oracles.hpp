#pragma once

#include "triadic/detector.hpp"

namespace triadic {

/// Vertex-enumeration oracle for the polyhedral protection value.
/// Handles box-patterned rows directly (corner combinations); other
/// polyhedra fall back to subsystem enumeration up to dimension 8.
double oracle_protection_polyhedron(const Mat& D, const Vec& c, const Vec& hbar, const Vec& x);

struct OracleConfig {
    int starts = 200;
    int iters = 5000;
    double step = 1e-3;
    int polish_iters = 3000;
    std::uint64_t seed = 0;
};

/// Brute-force reference for the per-step statistic: multi-start projected
/// gradient over the box intersected with the exact robust constraints
/// (closed-form protections), feasibility maintained by alternating
/// subgradient projections.
double oracle_score(const SystemModel& model, const Vec& y, const OracleConfig& cfg = {});

/// Exhaustive grid scan cross-check; rejects dimensions above 6.
double oracle_score_grid(const SystemModel& model, const Vec& y, double grid_step = 0.02);

/// Statistic of a detector that trusts its (possibly wrong) matrix
/// exactly: maximization over the orthogonal complement of the assumed
/// column space restricted to the box, by projected gradient.
double baseline_score(const Mat& assumed_H, double rho_u, const Vec& y, int iters = 2000);

/// Per-step baseline scores for a stream.
std::vector<double> baseline_score_series(const Mat& assumed_H, double rho_u,
                                          const ObservationStream& stream, int iters = 2000);

/// Exact solve of the plane-approximated problem (a strongly convex QP
/// over box and half-space constraints): scaled ADMM to identify the
/// active set, then an exact KKT polish. The returned saddle state
/// carries multipliers reconstructed so the full gradient metric
/// certifies optimality.
struct ExactPlaneSolve {
    Vec x;
    double value = 0.0;      // maximized objective at the optimum
    PrimalState primal;
    DualState dual;
    double grad_sq = 0.0;    // certificate: ~0 at an exact KKT point
};
ExactPlaneSolve exact_plane_solve(const RegionProblem& prob, const Polytope& poly);

}  // namespace triadic
