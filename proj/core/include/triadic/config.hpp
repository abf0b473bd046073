#pragma once

#include <string>

#include "triadic/detector.hpp"
#include "triadic/ieee14.hpp"

namespace triadic {

/// Everything one experiment needs, loadable from a flat sectioned
/// key=value file. Unknown keys are rejected; emit() documents every
/// default inline, and load(emit(c)) == c.
struct ExperimentConfig {
    // [model]
    std::string model_preset = "ieee14";  // ieee14 | custom
    double sigma_n = 0.25;
    double rho_u = 1.0;
    double delta = 0.1;
    int custom_meters = 3;
    int custom_states = 1;
    std::vector<double> custom_h = {-1.0, 0.1, 0.3};  // row-major
    std::string custom_regions = "0,1,2";             // rows per region, | separated

    // [uncertainty]
    std::string variant = "ellipsoid";  // singleton | ellipsoid | dnorm | polyhedron
    double ellipsoid_radius = 0.36;
    int dnorm_budget = 4;
    double dnorm_mag = 0.5;
    double poly_halfwidth = 0.5;  // box half-width for custom polyhedra

    // [inner]
    int inner_iterations = 30;
    double inner_penalty = 10.0;
    double inner_step_h = 0.02;
    double inner_step_mult = 0.5;
    bool inner_frozen_gradient = false;

    // [solver]
    std::string mode = "async";  // sync | async
    int active_count = 0;
    int staleness_bound = 10;
    double epsilon = 1e-5;
    long max_iters = 60000;
    std::uint64_t seed = 1;
    double delay_mu = 1.0;
    double delay_sigma = 0.5;
    double divergence_cap = 1e6;
    int check_period = 10;
    int freeze_after = 500;
    int capacity = 200;
    double gate_ratio = 1.5;
    bool refresh_slacks = true;
    double step_dual = 10.0;
    double step_local = 0.01;
    double step_slack = 0.005;
    double step_x = 0.01;
    double reg_floor = 0.0;
    double xi = 2.5;
    double nu = 0.0;
    bool derive_primal_steps = false;
    bool project_link_dual = false;
    bool scale_step_x = true;

    // [detector]
    std::vector<double> fap_targets = {250, 500, 1000, 2000};
    int calibration_runs = 8;
    int eval_runs = 40;
    int t_a = 1;
    int horizon = 500;
    std::vector<double> delay_bounds = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    double zeta = 0.0;  // 0 = calibrate

    // [output]
    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the sectioned key=value format; throws on unknown keys,
/// malformed lines, or type errors.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical emission with every key present and documented.
std::string emit_config(const ExperimentConfig& c);

/// Materialized settings derived from a config.
SystemModel build_model(const ExperimentConfig& c);
SolverSettings build_solver_settings(const ExperimentConfig& c);
SetKind parse_variant(const std::string& name);

}  // namespace triadic
