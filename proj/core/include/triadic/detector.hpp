#pragma once

#include <optional>

#include "triadic/async_rt.hpp"

namespace triadic {

/// Full solver stack used for one statistic evaluation.
struct SolverSettings {
    InnerSolverConfig inner;
    PolytopeConfig poly;
    ScheduleConfig schedule;
    RunConfig run;
};

/// Running detector bookkeeping. `stopped_at` is set the first time the
/// statistic reaches the threshold and never unset.
struct DetectorState {
    double statistic = 0.0;       // V
    double threshold = 0.0;       // zeta
    long t = 0;
    std::optional<long> stopped_at;

    void step(double score, double sigma_n);
};

/// One recursion step of the running statistic:
/// max(V_prev, 0) + score / (2 sigma_n^2).
double cusum_step(double v_prev, double score, double sigma_n);

/// Worst-case innovation score for one observation: partitions y into the
/// sub-regions and maximizes 2 x'y - ||x||^2 over the relaxed robust set.
/// Throws on solver divergence.
double robust_score(const SystemModel& model, const Vec& y, const SolverSettings& s);

/// Per-step scores for a whole stream (one solver run per step).
std::vector<double> score_series(const SystemModel& model, const ObservationStream& stream,
                                 const SolverSettings& s);

/// First time the running statistic reaches zeta, given precomputed scores.
std::optional<long> first_passage(const std::vector<double>& scores, double zeta, double sigma_n);

/// First alarm time over the stream, or nullopt if it never fires.
std::optional<long> stopping_time(const SystemModel& model, const ObservationStream& stream,
                                  double zeta, const SolverSettings& s);

struct Calibration {
    double zeta = 0.0;
    double achieved_fap = 0.0;
    int runs = 0;
};

/// Bisection on zeta until the mean change-free stopping time lands
/// within 5% of the target false-alarm period.
Calibration calibrate_threshold(const SystemModel& model, double target_fap, int runs,
                                const SolverSettings& s, std::uint64_t seed,
                                double tolerance = 0.05);

struct Evaluation {
    double add = 0.0;           // mean positive detection delay over alarmed runs
    int alarmed = 0;
    int runs = 0;
    std::vector<std::pair<double, double>> success;  // (delay bound, success rate)
};

/// Monte Carlo detection-delay evaluation with a change at t_a.
Evaluation evaluate(const SystemModel& model, double zeta, int n_runs, int t_a, int horizon,
                    const SolverSettings& s, std::uint64_t seed,
                    const std::vector<double>& delay_bounds);

/// Mean change-free stopping time at the given threshold.
double estimate_fap(const SystemModel& model, double zeta, int runs, int horizon,
                    const SolverSettings& s, std::uint64_t seed);

}  // namespace triadic
