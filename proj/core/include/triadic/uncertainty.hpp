#pragma once

#include <functional>
#include <optional>

#include "triadic/common.hpp"

namespace triadic {

enum class SetKind { Singleton, Polyhedron, Ellipsoid, DNorm, General };

/// One differentiable constraint c(h) <= 0 describing part of an
/// uncertainty set. The Hessian is required so that surrogate gradients
/// can be propagated through the inner iterates.
struct GeneralConstraint {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
};

/// Uncertainty description for one column of the measurement matrix.
///
/// `center` is the nominal column in full observation coordinates.
/// Deviations are restricted to the rows listed in `support` (empty
/// means all rows). Variant parameters are expressed in support-local
/// coordinates; the polyhedron constrains the column itself (D h <= c),
/// the other variants constrain the deviation from the center.
struct UncertaintySet {
    SetKind kind = SetKind::Singleton;
    Vec center;
    std::vector<int> support;

    Mat poly_D;
    Vec poly_c;
    double radius = 0.0;       // ellipsoid: ||h - center||_2 <= radius
    int dnorm_budget = 0;      // at most this many deviating components
    double dnorm_mag = 0.0;    // each deviation bounded by this magnitude
    std::vector<GeneralConstraint> constraints;  // General, on the support-local column

    int dim() const { return static_cast<int>(center.size()); }
    int support_dim() const { return support.empty() ? dim() : static_cast<int>(support.size()); }
    Vec gather(const Vec& x) const;          // x restricted to the support rows
    void scatter_add(Vec& into, const Vec& sub) const;
    Vec center_local() const;                // center restricted to the support rows
    void validate() const;
};

UncertaintySet make_singleton(const Vec& column);
UncertaintySet make_ellipsoid(const Vec& center, double radius, std::vector<int> support = {});
UncertaintySet make_dnorm(const Vec& center, int budget, double mag, std::vector<int> support = {});
UncertaintySet make_polyhedron(const Vec& center, const Mat& D, const Vec& c, std::vector<int> support = {});

/// Inner augmented-Lagrangian estimator settings.
struct InnerSolverConfig {
    int iterations = 30;       // D
    double penalty = 10.0;     // sigma
    double step_h = 0.02;      // eta_h
    double step_mult = 0.5;    // eta_phi
    bool frozen_gradient = false;  // differentiate with the final iterate frozen
};

struct AlmResult {
    Vec column;        // estimated worst-case column, full observation dim
    Vec multipliers;   // one per constraint of the canonical encoding
    Vec lifted;        // auxiliary coordinates (D-norm budget variables), if any
};

/// Runs exactly cfg.iterations alternating gradient steps on the
/// augmented Lagrangian of max (h - center)' x over the set.
/// h_init defaults to the nominal center.
AlmResult alm_inner_solve(const UncertaintySet& set, const Vec& x,
                          const InnerSolverConfig& cfg,
                          const Vec* h_init = nullptr);

/// Exact protection value p(x) = max_{h in set} (h - center)' x.
/// Closed forms for ellipsoid and D-norm; vertex enumeration for small
/// polyhedra, tight ALM otherwise. `mirrored` evaluates the sign-flipped
/// copy of the set.
double protection_exact(const UncertaintySet& set, const Vec& x, bool mirrored = false);

/// Surrogate constraint value g(x) = h_D(x)' x, where h_D is the inner
/// estimate started from the nominal center.
double surrogate_value(const UncertaintySet& set, const Vec& x,
                       const InnerSolverConfig& cfg, bool mirrored = false);

/// dg/dx, propagated through the inner iterates by forward-mode
/// sensitivity accumulation (or with h_D frozen when cfg asks for it).
Vec surrogate_gradient(const UncertaintySet& set, const Vec& x,
                       const InnerSolverConfig& cfg, bool mirrored = false);

/// Exact counterpart of the surrogate: center' x + p(x) with the exact
/// protection value, used by oracles and feasibility checks.
double robust_constraint_exact(const UncertaintySet& set, const Vec& x, bool mirrored = false);

/// Subgradient of the exact robust constraint (oracle-side projections).
Vec robust_constraint_exact_gradient(const UncertaintySet& set, const Vec& x, bool mirrored = false);

}  // namespace triadic
