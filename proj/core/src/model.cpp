#include "triadic/model.hpp"

#include <ostream>

namespace triadic {

void SystemModel::validate() const {
    require(H.rows() >= 1 && H.cols() >= 1, "H must be non-empty");
    require(sigma_n > 0.0, "sigma_n must be > 0");
    require(rho_u > 0.0, "rho_u must be > 0");
    require(static_cast<int>(nominal_columns.size()) == states(), "one nominal column per state");
    for (const auto& h : nominal_columns)
        require(h.size() == meters(), "nominal column dimension mismatch");
    require(delta.size() == states(), "one tolerance per column");
    require(delta.minCoeff() >= 0.0, "tolerances must be >= 0");
    require(!regions.empty(), "at least one sub-region");
    std::vector<bool> covered(meters(), false);
    for (const auto& rows : regions) {
        require(!rows.empty(), "empty sub-region");
        for (int r : rows) {
            require(r >= 0 && r < meters(), "region row out of range");
            covered[r] = true;
        }
    }
    for (bool ok : covered) require(ok, "regions must cover every observation row");
    require(static_cast<int>(sets.size()) == states(), "one uncertainty set per column");
    for (const auto& s : sets) {
        require(s.dim() == meters(), "uncertainty set dimension mismatch");
        s.validate();
    }
}

double constraint_delta(const SystemModel& m, int i) {
    require(i >= 0 && i < m.constraint_count(), "constraint index out of range");
    return m.delta[i % m.states()];
}

double constraint_value(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg) {
    require(i >= 0 && i < m.constraint_count(), "constraint index out of range");
    return surrogate_value(m.sets[i % m.states()], x, cfg, i >= m.states());
}

Vec constraint_gradient(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg) {
    require(i >= 0 && i < m.constraint_count(), "constraint index out of range");
    return surrogate_gradient(m.sets[i % m.states()], x, cfg, i >= m.states());
}

double constraint_exact(const SystemModel& m, int i, const Vec& x) {
    require(i >= 0 && i < m.constraint_count(), "constraint index out of range");
    return robust_constraint_exact(m.sets[i % m.states()], x, i >= m.states());
}

Vec orthogonal_residual(const Mat& H, const Vec& y) {
    require(H.rows() == y.size(), "orthogonal_residual: dimension mismatch");
    // minimum-norm least squares handles rank-deficient H
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(H);
    return y - H * cod.solve(y);
}

Vec attack_from(const Mat& H, const Vec& u) { return orthogonal_residual(H, u); }

Vec generate_attack(const Mat& H, Rng& rng) {
    std::uniform_real_distribution<double> comp(0.1, 1.0);
    Vec u(H.rows());
    for (int i = 0; i < u.size(); ++i) u[i] = comp(rng);
    return attack_from(H, u);
}

StateGen uniform_state_gen(int n, double lo, double hi) {
    return [n, lo, hi](Rng& rng) {
        std::uniform_real_distribution<double> d(lo, hi);
        Vec theta(n);
        for (int i = 0; i < n; ++i) theta[i] = d(rng);
        return theta;
    };
}

ObservationStream simulate_stream(const SystemModel& model, const StateGen& state_gen,
                                  int t_a, int T, Rng& rng) {
    require(T >= 1, "horizon must be >= 1");
    require(t_a >= 1 && t_a <= T + 1, "change time must lie in [1, T+1]");
    std::normal_distribution<double> noise(0.0, model.sigma_n);
    ObservationStream s;
    s.change_time = t_a;
    s.observations.reserve(T);
    for (int t = 1; t <= T; ++t) {
        Vec theta = state_gen(rng);
        require(theta.size() == model.states(), "state generator dimension mismatch");
        Vec y = model.H * theta;
        if (t >= t_a) y += generate_attack(model.H, rng);
        for (int i = 0; i < y.size(); ++i) y[i] += noise(rng);
        s.observations.push_back(std::move(y));
    }
    return s;
}

void write_stream_csv(const ObservationStream& s, std::ostream& out) {
    const int M = s.observations.empty() ? 0 : static_cast<int>(s.observations.front().size());
    out << "t";
    for (int i = 1; i <= M; ++i) out << ",y_" << i;
    out << ",is_post_change\n";
    for (int t = 1; t <= s.horizon(); ++t) {
        out << t;
        const Vec& y = s.observations[t - 1];
        for (int i = 0; i < M; ++i) out << ',' << y[i];
        out << ',' << (s.post_change(t) ? 1 : 0) << '\n';
    }
}

}  // namespace triadic
