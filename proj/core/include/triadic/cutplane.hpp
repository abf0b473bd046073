#pragma once

#include <iosfwd>

#include "triadic/model.hpp"

namespace triadic {

/// Affine inequality normal'x + offset <= 0 separating an infeasible
/// iterate from the robust feasible region.
struct CuttingPlane {
    Vec normal;     // b_s
    double offset;  // kappa_s
    double residual(const Vec& x) const { return normal.dot(x) + offset; }
};

struct PolytopeConfig {
    int check_period = 10;     // w
    int freeze_after = 500;    // K_1: no additions once k exceeds this
    int capacity = 200;        // P
    /// A constraint spawns a cut only when its violation exceeds this
    /// multiple of the worst current plane violation; keeps the set from
    /// filling with re-linearizations of a point the duals have not yet
    /// pushed inside.
    double gate_ratio = 1.5;
    bool refresh_slacks = true;  // re-seed squared slacks at check boundaries
};

/// Live cutting-plane set. Planes are append-only while additions are
/// allowed; the capacity bound is hard.
struct Polytope {
    std::vector<CuttingPlane> planes;
    int capacity = 200;
    int dropped_capacity = 0;    // additions refused because the set was full
    int dropped_degenerate = 0;  // zero-normal candidates skipped

    int size() const { return static_cast<int>(planes.size()); }
    bool full() const { return size() >= capacity; }
    double normal_sq_sum() const { return normal_sq_sum_; }
    /// Largest residual at x over all planes (0 when empty).
    double max_residual(const Vec& x) const;
    /// Appends if there is room and the plane is not degenerate;
    /// returns whether the plane was stored.
    bool append(CuttingPlane plane);
    bool near_duplicate(const CuttingPlane& plane, double tol = 1e-7) const;

  private:
    double normal_sq_sum_ = 0.0;
};

/// True iff the surrogate constraint i is violated at x.
bool violated(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg);

/// Linearizes the violated surrogate constraint at x: the returned plane
/// cuts x off (residual(x) > 0) while every point satisfying the exact
/// constraint keeps residual <= 0.
CuttingPlane generate_plane(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg);

/// Couples fresh planes with one slack and one dual entry each. New
/// slacks are seeded so the equality holds at the current x when the
/// plane is satisfied there, zero otherwise.
struct SetUpdateResult {
    int added = 0;
    int at_capacity = 0;
};
SetUpdateResult update_sets(Polytope& poly, const std::vector<CuttingPlane>& fresh,
                            std::vector<double>& plane_slack, std::vector<double>& plane_dual,
                            const Vec& x);

/// One row per plane: s, b_1..b_M, kappa.
void write_planes_csv(const Polytope& poly, std::ostream& out);

}  // namespace triadic
