#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "triadic/saddle.hpp"

namespace triadic {

/// Per-worker bookkeeping for the virtual-time scheduler.
struct WorkerClock {
    double next_ready = 0.0;  // virtual timestamp at which its result is available
    int last_active = 0;      // iteration of its newest snapshot
    std::uint64_t jobs = 0;   // completed jobs; indexes the worker's delay stream
};

struct Clocks {
    std::vector<WorkerClock> workers;
    double now = 0.0;
    int size() const { return static_cast<int>(workers.size()); }
};

enum class RunMode { Sync, Async };

struct RunConfig {
    RunMode mode = RunMode::Sync;
    int active_count = 0;      // S; 0 means all workers
    int staleness_bound = 1;   // tau
    std::uint64_t seed = 0;
    long max_iters = 200000;
    double epsilon = 1e-4;     // termination target on the squared gradient norm
    double delay_mu = 1.0;     // log-normal delay parameters
    double delay_sigma = 0.5;
    double divergence_cap = 1e6;
    bool record_trace = false;
    long trace_stride = 1;

    void validate(int workers) const;
    int effective_active(int workers) const;
    int effective_staleness(int workers) const;
};

/// The S workers with the smallest ready times (ties to the lower index);
/// a worker whose staleness would reach tau if skipped is force-included,
/// displacing the slowest otherwise-chosen worker.
std::vector<int> next_active_set(const Clocks& clocks, int k, int S, int tau);

/// Duration of worker `l`'s job number `job`, drawn from its own
/// deterministic log-normal stream.
double worker_delay(std::uint64_t seed, int l, std::uint64_t job, double mu, double sigma);

/// Chosen workers restart at the iteration's completion time with a fresh
/// delay draw; everyone else keeps cooking.
void advance(Clocks& clocks, const std::vector<int>& chosen, int k_next, double completion,
             std::uint64_t seed, double mu, double sigma);

struct TraceRow {
    long k;
    double virtual_time;
    std::uint64_t active_mask;
    double grad_sq;
    double objective;
    double lagrangian_value;
    int plane_count;
};

enum class SolveStatus { Converged, IterationLimit, Diverged };

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    Vec x;
    double value = 0.0;       // attained objective, the per-timestep statistic
    long iterations = 0;
    double virtual_time = 0.0;
    int max_staleness = 0;
    Polytope polytope;
    PrimalState primal;
    DualState dual;
    std::vector<TraceRow> trace;
};

struct SolveProblem {
    RegionProblem region;
    InnerSolverConfig inner;
    PolytopeConfig poly;
    ScheduleConfig schedule;
};

/// Master-worker loop: active workers take their local descent steps, the
/// master applies its updates, and every check period the cutting-plane
/// set is refined and rebroadcast. Terminates when the squared gradient
/// norm of the Lagrangian reaches epsilon or the iteration budget runs out.
SolveResult run_solver(const SolveProblem& problem, const RunConfig& run);

/// k, virtual_time, active set bitmask, ||grad||^2, objective, L_p, |P|.
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace triadic
