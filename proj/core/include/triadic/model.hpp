#pragma once

#include <functional>
#include <iosfwd>

#include "triadic/common.hpp"
#include "triadic/uncertainty.hpp"

namespace triadic {

/// Observation model with sub-region partitioning and per-column
/// uncertainty. `regions[l]` lists the observation rows owned by
/// sub-region l; together the regions must cover every row.
struct SystemModel {
    Mat H;                                   // true measurement matrix, meters x states
    std::vector<Vec> nominal_columns;        // estimated columns used by the detector
    double sigma_n = 1.0;                    // noise standard deviation
    double rho_u = 1.0;                      // box bound on the components of x
    Vec delta;                               // relaxation tolerances, one per column
    std::vector<std::vector<int>> regions;   // row selectors per sub-region
    std::vector<UncertaintySet> sets;        // uncertainty description per column

    int meters() const { return static_cast<int>(H.rows()); }
    int states() const { return static_cast<int>(H.cols()); }
    int region_count() const { return static_cast<int>(regions.size()); }
    /// Number of robust column constraints (each column plus its mirror).
    int constraint_count() const { return 2 * states(); }
    void validate() const;
};

/// Robust column constraint i of 2N; indices >= N are the sign-mirrored
/// copies sharing the tolerance of their base column.
double constraint_delta(const SystemModel& m, int i);
double constraint_value(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg);
Vec constraint_gradient(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg);
double constraint_exact(const SystemModel& m, int i, const Vec& x);

/// Component of y orthogonal to the column space of H, computed through a
/// rank-revealing least-squares factorization (minimum-norm for
/// rank-deficient H).
Vec orthogonal_residual(const Mat& H, const Vec& y);

/// Attack vector built from a fixed pre-image: the orthogonal component
/// of u with respect to the column space of H.
Vec attack_from(const Mat& H, const Vec& u);

/// Draws u with i.i.d. components uniform on [0.1, 1] and projects it
/// onto the orthogonal complement of the column space.
Vec generate_attack(const Mat& H, Rng& rng);

using StateGen = std::function<Vec(Rng&)>;
StateGen uniform_state_gen(int n, double lo = -1.0, double hi = 1.0);

/// Time-indexed observations; change_time is 1-based and T+1 encodes
/// "no change", so false-alarm calibration shares this code path.
struct ObservationStream {
    std::vector<Vec> observations;
    int change_time = 0;
    int horizon() const { return static_cast<int>(observations.size()); }
    bool post_change(int t) const { return t >= change_time; }  // t is 1-based
};

/// y_t = H theta_t + n_t, plus a freshly drawn attack for t >= t_a.
ObservationStream simulate_stream(const SystemModel& model, const StateGen& state_gen,
                                  int t_a, int T, Rng& rng);

/// One row per step: t, y_1..y_M, is_post_change.
void write_stream_csv(const ObservationStream& s, std::ostream& out);

}  // namespace triadic
