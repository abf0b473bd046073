#include "triadic/async_rt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace triadic {

void RunConfig::validate(int workers) const {
    require(workers >= 1, "need at least one worker");
    const int S = effective_active(workers);
    const int tau = effective_staleness(workers);
    require(S >= 1 && S <= workers, "active count must lie in [1, L]");
    require(tau >= 1, "staleness bound must be >= 1");
    require(static_cast<long>(S) * tau >= workers,
            "S * tau < L cannot keep every worker within the staleness bound");
    require(max_iters >= 1, "iteration budget must be >= 1");
    require(epsilon > 0.0, "epsilon must be > 0");
    if (record_trace) require(workers <= 64, "trace bitmask limited to 64 workers");
}

int RunConfig::effective_active(int workers) const {
    if (mode == RunMode::Sync) return workers;
    return active_count == 0 ? workers : active_count;
}

int RunConfig::effective_staleness(int workers) const {
    (void)workers;
    return mode == RunMode::Sync ? 1 : staleness_bound;
}

std::vector<int> next_active_set(const Clocks& clocks, int k, int S, int tau) {
    const int L = clocks.size();
    std::vector<int> order(L);
    for (int i = 0; i < L; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = clocks.workers[a].next_ready;
        const double rb = clocks.workers[b].next_ready;
        return ra != rb ? ra < rb : a < b;
    });
    std::vector<int> chosen(order.begin(), order.begin() + std::min(S, L));
    // force-include workers that would hit the staleness bound if skipped
    std::vector<int> forced;
    for (int l = 0; l < L; ++l)
        if ((k + 1) - clocks.workers[l].last_active >= tau) forced.push_back(l);
    for (int f : forced) {
        if (std::find(chosen.begin(), chosen.end(), f) != chosen.end()) continue;
        // displace the slowest chosen worker that is not itself forced
        int victim = -1;
        double slowest = -1.0;
        for (size_t i = 0; i < chosen.size(); ++i) {
            const int c = chosen[i];
            if (std::find(forced.begin(), forced.end(), c) != forced.end()) continue;
            const double r = clocks.workers[c].next_ready;
            if (r > slowest || (r == slowest && victim >= 0 && c > chosen[victim])) {
                slowest = r;
                victim = static_cast<int>(i);
            }
        }
        if (victim >= 0)
            chosen[victim] = f;
        else
            chosen.push_back(f);  // every slot forced; grow rather than starve
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double worker_delay(std::uint64_t seed, int l, std::uint64_t job, double mu, double sigma) {
    Rng rng = make_rng(seed, 0x9a5cf3u + static_cast<std::uint64_t>(l), job);
    std::lognormal_distribution<double> d(mu, sigma);
    return d(rng);
}

void advance(Clocks& clocks, const std::vector<int>& chosen, int k_next, double completion,
             std::uint64_t seed, double mu, double sigma) {
    clocks.now = completion;
    for (int l : chosen) {
        auto& w = clocks.workers[l];
        w.next_ready = completion + worker_delay(seed, l, w.jobs, mu, sigma);
        ++w.jobs;
        w.last_active = k_next;
    }
}

SolveResult run_solver(const SolveProblem& problem, const RunConfig& run) {
    const RegionProblem& prob = problem.region;
    const int L = prob.region_count();
    run.validate(L);
    problem.schedule.validate();
    const int S = run.effective_active(L);
    const int tau = run.effective_staleness(L);

    SolveResult out;
    out.polytope.capacity = problem.poly.capacity;
    PrimalState primal = init_primal(prob, out.polytope);
    DualState dual = init_dual(prob, out.polytope);
    Clocks clocks;
    clocks.workers.assign(L, WorkerClock{});
    for (int l = 0; l < L; ++l) {
        // every worker starts its first job at time zero
        clocks.workers[l].next_ready = worker_delay(run.seed, l, 0, run.delay_mu, run.delay_sigma);
        clocks.workers[l].jobs = 1;
    }

    std::vector<WorkerResult> results(L);
    for (long k = 0; k < run.max_iters; ++k) {
        const std::vector<int> active = next_active_set(clocks, static_cast<int>(k), S, tau);
        for (int l = 0; l < L; ++l) {
            const int stale = static_cast<int>(k) + 1 - clocks.workers[l].last_active;
            out.max_staleness = std::max(out.max_staleness, stale);
        }

        const Schedule sched =
            schedule_at(static_cast<int>(k), problem.schedule, out.polytope.normal_sq_sum());

        // workers compute from their snapshots; inactive blocks are frozen,
        // so the live state carries exactly the stale values
        for (int l : active) results[l] = worker_update(l, primal, dual, prob, sched);
        for (int l : active) {
            primal.local[l] = std::move(results[l].local);
            primal.slack_lo[l] = std::move(results[l].slack_lo);
            primal.slack_hi[l] = std::move(results[l].slack_hi);
        }
        master_update(primal, dual, out.polytope, prob, sched, active);

        // iteration completes once every chosen worker's result is in
        double completion = clocks.now;
        for (int l : active) completion = std::max(completion, clocks.workers[l].next_ready);
        advance(clocks, active, static_cast<int>(k) + 1, completion, run.seed, run.delay_mu,
                run.delay_sigma);

        if ((k + 1) % problem.poly.check_period == 0) {
            if (k <= problem.poly.freeze_after && !out.polytope.full()) {
                const double poly_viol = out.polytope.max_residual(primal.x);
                std::vector<CuttingPlane> fresh;
                for (int i = 0; i < prob.model->constraint_count(); ++i) {
                    const double g = constraint_value(*prob.model, i, primal.x, problem.inner);
                    const double viol = g - constraint_delta(*prob.model, i);
                    if (viol <= 1e-9) continue;
                    if (viol <= problem.poly.gate_ratio * std::max(0.0, poly_viol)) continue;
                    Vec b = constraint_gradient(*prob.model, i, primal.x, problem.inner);
                    if (b.norm() < 1e-12) {
                        ++out.polytope.dropped_degenerate;
                        continue;
                    }
                    const double kappa = g - b.dot(primal.x) - constraint_delta(*prob.model, i);
                    CuttingPlane plane{std::move(b), kappa};
                    if (out.polytope.near_duplicate(plane)) continue;
                    fresh.push_back(std::move(plane));
                }
                update_sets(out.polytope, fresh, primal.plane_slack, dual.dual_plane, primal.x);
            }
            if (problem.poly.refresh_slacks) refresh_slacks(primal, out.polytope, prob);
        }

        const double g2 = grad_norm_sq(primal, dual, out.polytope, prob);
        out.iterations = k + 1;
        out.virtual_time = clocks.now;

        if (run.record_trace && ((k + 1) % run.trace_stride == 0 || k + 1 == run.max_iters)) {
            std::uint64_t mask = 0;
            for (int l : active) mask |= (1ULL << l);
            out.trace.push_back(TraceRow{k + 1, clocks.now, mask, g2,
                                         objective_value(primal, prob),
                                         lagrangian(primal, dual, out.polytope, prob),
                                         out.polytope.size()});
        }

        if (!state_bounded(primal, dual, run.divergence_cap)) {
            out.status = SolveStatus::Diverged;
            break;
        }
        if (g2 <= run.epsilon) {
            out.status = SolveStatus::Converged;
            break;
        }
    }
    out.x = primal.x;
    out.value = objective_value(primal, prob);
    out.primal = std::move(primal);
    out.dual = std::move(dual);
    return out;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
    out << "k,virtual_time,active_mask,grad_sq,objective,lagrangian,planes\n";
    for (const auto& r : trace) {
        out << r.k << ',' << r.virtual_time << ',' << r.active_mask << ',' << r.grad_sq << ','
            << r.objective << ',' << r.lagrangian_value << ',' << r.plane_count << '\n';
    }
}

}  // namespace triadic
