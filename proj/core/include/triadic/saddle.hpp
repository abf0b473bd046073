#pragma once

#include "triadic/cutplane.hpp"

namespace triadic {

/// One timestep of the detection problem in worker-partitioned form.
struct RegionProblem {
    const SystemModel* model = nullptr;
    Vec y;                      // full observation
    std::vector<Vec> y_local;   // per-region rows of y
    double rho = 0.0;

    int region_count() const { return static_cast<int>(y_local.size()); }
    int region_dim(int l) const { return static_cast<int>(y_local[l].size()); }
    const std::vector<int>& rows(int l) const { return model->regions[l]; }
    int x_dim() const { return static_cast<int>(y.size()); }
};

RegionProblem make_region_problem(const SystemModel& model, const Vec& y);

/// Primal variables: per-region local attack estimates, the squared-slack
/// pairs absorbing the box, one squared slack per cutting plane, and the
/// global estimate x.
struct PrimalState {
    std::vector<Vec> local;       // mu_l
    std::vector<Vec> slack_lo;    // r_l   (lower box bound)
    std::vector<Vec> slack_hi;    // p_l   (upper box bound)
    std::vector<double> plane_slack;  // q_s
    Vec x;
};

/// Multipliers for the lower/upper box equalities, the local-global link,
/// and the plane equalities. The link multiplier is sign-free; the rest
/// stay nonnegative through plus-projections.
struct DualState {
    std::vector<Vec> dual_lo;     // lambda_l
    std::vector<Vec> dual_hi;     // alpha_l
    std::vector<Vec> dual_link;   // beta_l
    std::vector<double> dual_plane;  // gamma_s
};

PrimalState init_primal(const RegionProblem& prob, const Polytope& poly);
DualState init_dual(const RegionProblem& prob, const Polytope& poly);

struct ScheduleConfig {
    // dual ascent step sizes; these also set the regularization decay
    double step_dual_lo = 10.0;
    double step_dual_hi = 10.0;
    double step_dual_link = 10.0;
    double step_dual_plane = 10.0;
    // regularization floors (0 keeps the pure decay)
    double floor_lo = 0.0, floor_hi = 0.0, floor_link = 0.0, floor_plane = 0.0;

    // primal descent step sizes (used when derive_primal_steps is off)
    double step_local = 0.01;
    double step_slack_lo = 0.005;
    double step_slack_hi = 0.005;
    double step_plane_slack = 0.005;
    double step_x = 0.01;
    /// Divide the x step by max(1, sum of squared plane normals); keeps
    /// the x/plane-dual loop stable as cuts accumulate.
    bool scale_step_x = true;

    /// Derive the five primal step sizes from the convergence schedule
    /// (requires positive floors).
    bool derive_primal_steps = false;
    double xi = 2.5;           // must be > 2
    double nu = 0.0;           // bound on the squared-normal sum; 0 = use the live sum
    double bound_slack_lo = 0.0;   // w_r; 0 = sqrt(2 rho) default
    double bound_slack_hi = 0.0;   // w_p
    double bound_plane_slack = 0.0;  // w_q

    /// Clamp the link multiplier at zero the way the update rule is
    /// written. Off by default: the linked constraint is an equality and
    /// its multiplier needs both signs to reach the saddle point.
    bool project_link_dual = false;

    void validate() const;
};

/// Step sizes and regularization weights in effect at one iteration.
struct Schedule {
    double step_local, step_slack_lo, step_slack_hi, step_plane_slack, step_x;
    double step_dual_lo, step_dual_hi, step_dual_link, step_dual_plane;
    double reg_lo, reg_hi, reg_link, reg_plane;  // c^k
    bool project_link_dual = false;
};

/// Regularization weights decay as 1/(eta (k+1)^{1/4}), clipped below at
/// their floors; derived primal steps follow the schedule formulas.
Schedule schedule_at(int k, const ScheduleConfig& cfg, double normal_sq_sum);

/// Per-iteration variant of the derived x step, using the live c^k values
/// and squared-normal sum (diagnostic companion to the time-invariant form).
double derived_step_x_at(int k, const ScheduleConfig& cfg, double normal_sq_sum);

double lagrangian(const PrimalState& p, const DualState& d, const Polytope& poly,
                  const RegionProblem& prob);
double regularized_lagrangian(const PrimalState& p, const DualState& d, const Polytope& poly,
                              const RegionProblem& prob, const Schedule& s);

/// One descent step for region l's local block (mu, r, p) evaluated at the
/// worker's snapshot. Inactive workers keep their previous values.
struct WorkerResult {
    Vec local, slack_lo, slack_hi;
};
WorkerResult worker_update(int l, const PrimalState& snap, const DualState& dsnap,
                           const RegionProblem& prob, const Schedule& s);

/// Applies the master-side updates in order (plane slacks, x, then the
/// four dual blocks), each using the most recently written arguments.
/// Only workers in `active` have their lo/hi/link duals refreshed.
void master_update(PrimalState& p, DualState& d, const Polytope& poly,
                   const RegionProblem& prob, const Schedule& s,
                   const std::vector<int>& active);

/// Squared norm of the full (unregularized) Lagrangian gradient; the
/// optimality metric driving termination.
double grad_norm_sq(const PrimalState& p, const DualState& d, const Polytope& poly,
                    const RegionProblem& prob);

/// Value of the maximized objective sum_l (2 y_l' mu_l - ||mu_l||^2).
double objective_value(const PrimalState& p, const RegionProblem& prob);

/// False once any variable exceeds the cap or stops being finite.
bool state_bounded(const PrimalState& p, const DualState& d, double cap = 1e6);

/// Re-seed squared slacks upward so the equalities can hold at the
/// current point; the gradient dynamics can only shrink slack magnitudes,
/// so retired constraints would otherwise pin the optimality metric.
void refresh_slacks(PrimalState& p, const Polytope& poly, const RegionProblem& prob);

}  // namespace triadic
