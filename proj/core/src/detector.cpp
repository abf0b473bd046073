#include "triadic/detector.hpp"

#include <algorithm>
#include <cmath>

namespace triadic {

double cusum_step(double v_prev, double score, double sigma_n) {
    require(sigma_n > 0.0, "sigma_n must be > 0");
    return std::max(v_prev, 0.0) + score / (2.0 * sigma_n * sigma_n);
}

void DetectorState::step(double score, double sigma_n) {
    ++t;
    statistic = cusum_step(statistic, score, sigma_n);
    if (!stopped_at && statistic >= threshold) stopped_at = t;
}

double robust_score(const SystemModel& model, const Vec& y, const SolverSettings& s) {
    SolveProblem problem{make_region_problem(model, y), s.inner, s.poly, s.schedule};
    SolveResult res = run_solver(problem, s.run);
    if (res.status == SolveStatus::Diverged)
        throw std::runtime_error("statistic solver diverged (" +
                                 std::to_string(res.iterations) + " iterations)");
    return res.value;
}

std::vector<double> score_series(const SystemModel& model, const ObservationStream& stream,
                                 const SolverSettings& s) {
    std::vector<double> scores;
    scores.reserve(stream.horizon());
    for (const Vec& y : stream.observations) scores.push_back(robust_score(model, y, s));
    return scores;
}

std::optional<long> first_passage(const std::vector<double>& scores, double zeta, double sigma_n) {
    double v = 0.0;
    for (size_t t = 0; t < scores.size(); ++t) {
        v = cusum_step(v, scores[t], sigma_n);
        if (v >= zeta) return static_cast<long>(t) + 1;
    }
    return std::nullopt;
}

std::optional<long> stopping_time(const SystemModel& model, const ObservationStream& stream,
                                  double zeta, const SolverSettings& s) {
    return first_passage(score_series(model, stream, s), zeta, model.sigma_n);
}

namespace {

// Change-free score trajectories, one per run; reused across thresholds
// so calibration bisection costs no extra solves.
std::vector<std::vector<double>> calibration_scores(const SystemModel& model, int runs,
                                                    int horizon, const SolverSettings& s,
                                                    std::uint64_t seed) {
    std::vector<std::vector<double>> all;
    all.reserve(runs);
    StateGen gen = uniform_state_gen(model.states());
    for (int r = 0; r < runs; ++r) {
        Rng rng = make_rng(seed, 0xca11, r);
        ObservationStream stream = simulate_stream(model, gen, horizon + 1, horizon, rng);
        all.push_back(score_series(model, stream, s));
    }
    return all;
}

double mean_stop(const std::vector<std::vector<double>>& scores, double zeta, double sigma_n) {
    double total = 0.0;
    for (const auto& run : scores) {
        auto stop = first_passage(run, zeta, sigma_n);
        total += stop ? static_cast<double>(*stop) : static_cast<double>(run.size());
    }
    return total / static_cast<double>(scores.size());
}

}  // namespace

double estimate_fap(const SystemModel& model, double zeta, int runs, int horizon,
                    const SolverSettings& s, std::uint64_t seed) {
    auto scores = calibration_scores(model, runs, horizon, s, seed);
    return mean_stop(scores, zeta, model.sigma_n);
}

Calibration calibrate_threshold(const SystemModel& model, double target_fap, int runs,
                                const SolverSettings& s, std::uint64_t seed, double tolerance) {
    require(target_fap >= 1.0, "target false-alarm period must be >= 1");
    require(runs >= 1, "calibration needs at least one run");
    const int horizon = static_cast<int>(std::ceil(4.0 * target_fap));
    auto scores = calibration_scores(model, runs, horizon, s, seed);

    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (mean_stop(scores, hi, model.sigma_n) < target_fap) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 40) throw std::runtime_error("calibration bracket failure");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fap = mean_stop(scores, mid, model.sigma_n);
        if (std::abs(fap - target_fap) <= tolerance * target_fap) {
            return Calibration{mid, fap, runs};
        }
        (fap < target_fap ? lo : hi) = mid;
    }
    const double mid = 0.5 * (lo + hi);
    return Calibration{mid, mean_stop(scores, mid, model.sigma_n), runs};
}

Evaluation evaluate(const SystemModel& model, double zeta, int n_runs, int t_a, int horizon,
                    const SolverSettings& s, std::uint64_t seed,
                    const std::vector<double>& delay_bounds) {
    Evaluation ev;
    ev.runs = n_runs;
    StateGen gen = uniform_state_gen(model.states());
    std::vector<double> delays;
    for (int r = 0; r < n_runs; ++r) {
        // disjoint stream from the calibration seed range
        Rng rng = make_rng(seed, 0xe7a1, r);
        ObservationStream stream = simulate_stream(model, gen, t_a, horizon, rng);
        auto stop = stopping_time(model, stream, zeta, s);
        if (stop) {
            ++ev.alarmed;
            delays.push_back(std::max(0.0, static_cast<double>(*stop - t_a)));
        }
    }
    if (!delays.empty()) {
        double sum = 0.0;
        for (double d : delays) sum += d;
        ev.add = sum / static_cast<double>(delays.size());
    }
    for (double b : delay_bounds) {
        int hits = 0;
        for (double d : delays)
            if (d <= b) ++hits;
        ev.success.emplace_back(b, static_cast<double>(hits) / std::max(1, n_runs));
    }
    return ev;
}

}  // namespace triadic
