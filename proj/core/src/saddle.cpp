#include "triadic/saddle.hpp"

#include <cmath>

namespace triadic {

RegionProblem make_region_problem(const SystemModel& model, const Vec& y) {
    require(y.size() == model.meters(), "observation dimension mismatch");
    RegionProblem prob;
    prob.model = &model;
    prob.y = y;
    prob.rho = model.rho_u;
    prob.y_local.reserve(model.region_count());
    for (const auto& rows : model.regions) {
        Vec yl(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) yl[i] = y[rows[i]];
        prob.y_local.push_back(std::move(yl));
    }
    return prob;
}

PrimalState init_primal(const RegionProblem& prob, const Polytope& poly) {
    PrimalState p;
    const int L = prob.region_count();
    p.local.reserve(L);
    p.slack_lo.reserve(L);
    p.slack_hi.reserve(L);
    // Slacks start so the box equalities hold exactly at the zero point;
    // the check-boundary refresh grows them as the local estimates move.
    const double s0 = std::sqrt(prob.rho);
    for (int l = 0; l < L; ++l) {
        const int m = prob.region_dim(l);
        p.local.emplace_back(Vec::Zero(m));
        p.slack_lo.emplace_back(Vec::Constant(m, s0));
        p.slack_hi.emplace_back(Vec::Constant(m, s0));
    }
    p.x = Vec::Zero(prob.x_dim());
    p.plane_slack.reserve(poly.size());
    for (const auto& plane : poly.planes)
        p.plane_slack.push_back(std::sqrt(std::max(0.0, -plane.residual(p.x))));
    return p;
}

DualState init_dual(const RegionProblem& prob, const Polytope& poly) {
    DualState d;
    const int L = prob.region_count();
    for (int l = 0; l < L; ++l) {
        const int m = prob.region_dim(l);
        d.dual_lo.emplace_back(Vec::Zero(m));
        d.dual_hi.emplace_back(Vec::Zero(m));
        d.dual_link.emplace_back(Vec::Zero(m));
    }
    d.dual_plane.assign(poly.size(), 0.0);
    return d;
}

void ScheduleConfig::validate() const {
    require(step_dual_lo > 0 && step_dual_hi > 0 && step_dual_link > 0 && step_dual_plane > 0,
            "dual step sizes must be positive");
    require(floor_lo >= 0 && floor_hi >= 0 && floor_link >= 0 && floor_plane >= 0,
            "regularization floors must be >= 0");
    require(xi > 2.0, "xi must exceed 2");
    if (derive_primal_steps)
        require(floor_lo > 0 && floor_hi > 0 && floor_link > 0 && floor_plane > 0,
                "derived primal steps need positive floors");
    else
        require(step_local > 0 && step_slack_lo > 0 && step_slack_hi > 0 &&
                    step_plane_slack > 0 && step_x > 0,
                "primal step sizes must be positive");
}

namespace {

double reg_weight(double eta, double floor, int k) {
    return std::max(1.0 / (eta * std::pow(static_cast<double>(k) + 1.0, 0.25)), floor);
}

}  // namespace

Schedule schedule_at(int k, const ScheduleConfig& cfg, double normal_sq_sum) {
    cfg.validate();
    Schedule s;
    s.step_dual_lo = cfg.step_dual_lo;
    s.step_dual_hi = cfg.step_dual_hi;
    s.step_dual_link = cfg.step_dual_link;
    s.step_dual_plane = cfg.step_dual_plane;
    s.reg_lo = reg_weight(cfg.step_dual_lo, cfg.floor_lo, k);
    s.reg_hi = reg_weight(cfg.step_dual_hi, cfg.floor_hi, k);
    s.reg_link = reg_weight(cfg.step_dual_link, cfg.floor_link, k);
    s.reg_plane = reg_weight(cfg.step_dual_plane, cfg.floor_plane, k);
    s.project_link_dual = cfg.project_link_dual;

    if (cfg.derive_primal_steps) {
        const double xi = cfg.xi;
        const double nu = cfg.nu > 0.0 ? cfg.nu : std::max(normal_sq_sum, 1.0);
        const double rho_default = 1.0;  // callers pass bounds when rho differs
        const double wr = cfg.bound_slack_lo > 0 ? cfg.bound_slack_lo : std::sqrt(2.0 * rho_default);
        const double wp = cfg.bound_slack_hi > 0 ? cfg.bound_slack_hi : std::sqrt(2.0 * rho_default);
        const double wq = cfg.bound_plane_slack > 0 ? cfg.bound_plane_slack : std::sqrt(2.0 * rho_default);
        s.step_local = 1.0 / (8.0 * xi / (cfg.step_dual_lo * cfg.floor_lo * cfg.floor_lo) +
                              8.0 * xi / (cfg.step_dual_hi * cfg.floor_hi * cfg.floor_hi) +
                              8.0 * xi / (cfg.step_dual_link * cfg.floor_link * cfg.floor_link));
        s.step_x = 1.0 / (8.0 * xi / (cfg.step_dual_link * cfg.floor_link * cfg.floor_link) +
                          8.0 * xi * nu / (cfg.step_dual_plane * cfg.floor_plane * cfg.floor_plane));
        s.step_slack_lo = cfg.step_dual_lo * cfg.floor_lo * cfg.floor_lo / (32.0 * wr * wr * xi);
        s.step_slack_hi = cfg.step_dual_hi * cfg.floor_hi * cfg.floor_hi / (32.0 * wp * wp * xi);
        s.step_plane_slack = cfg.step_dual_plane * cfg.floor_plane * cfg.floor_plane / (32.0 * wq * wq * xi);
    } else {
        s.step_local = cfg.step_local;
        s.step_slack_lo = cfg.step_slack_lo;
        s.step_slack_hi = cfg.step_slack_hi;
        s.step_plane_slack = cfg.step_plane_slack;
        s.step_x = cfg.scale_step_x ? cfg.step_x / std::max(1.0, normal_sq_sum) : cfg.step_x;
    }
    return s;
}

double derived_step_x_at(int k, const ScheduleConfig& cfg, double normal_sq_sum) {
    const double cb = reg_weight(cfg.step_dual_link, cfg.floor_link, k);
    const double cg = reg_weight(cfg.step_dual_plane, cfg.floor_plane, k);
    return 1.0 / (8.0 * cfg.xi / (cfg.step_dual_link * cb * cb) +
                  8.0 * cfg.xi * normal_sq_sum / (cfg.step_dual_plane * cg * cg));
}

double lagrangian(const PrimalState& p, const DualState& d, const Polytope& poly,
                  const RegionProblem& prob) {
    const int L = prob.region_count();
    double val = 0.0;
    for (int l = 0; l < L; ++l) {
        const Vec& mu = p.local[l];
        val += mu.squaredNorm() - 2.0 * prob.y_local[l].dot(mu);
        const Vec lo = (-mu.array() - prob.rho + p.slack_lo[l].array().square()).matrix();
        const Vec hi = (mu.array() - prob.rho + p.slack_hi[l].array().square()).matrix();
        val += d.dual_lo[l].dot(lo) + d.dual_hi[l].dot(hi);
        Vec link = mu;
        const auto& rows = prob.rows(l);
        for (size_t i = 0; i < rows.size(); ++i) link[i] -= p.x[rows[i]];
        val += d.dual_link[l].dot(link);
    }
    for (int s = 0; s < poly.size(); ++s) {
        val += d.dual_plane[s] *
               (poly.planes[s].residual(p.x) + p.plane_slack[s] * p.plane_slack[s]);
    }
    return val;
}

double regularized_lagrangian(const PrimalState& p, const DualState& d, const Polytope& poly,
                              const RegionProblem& prob, const Schedule& s) {
    double val = lagrangian(p, d, poly, prob);
    for (int l = 0; l < prob.region_count(); ++l) {
        val -= 0.5 * s.reg_lo * d.dual_lo[l].squaredNorm();
        val -= 0.5 * s.reg_hi * d.dual_hi[l].squaredNorm();
        val -= 0.5 * s.reg_link * d.dual_link[l].squaredNorm();
    }
    for (double g : d.dual_plane) val -= 0.5 * s.reg_plane * g * g;
    return val;
}

WorkerResult worker_update(int l, const PrimalState& snap, const DualState& dsnap,
                           const RegionProblem& prob, const Schedule& s) {
    const Vec& mu = snap.local[l];
    const Vec& r = snap.slack_lo[l];
    const Vec& q = snap.slack_hi[l];
    WorkerResult out;
    out.local = mu - s.step_local * (2.0 * mu - 2.0 * prob.y_local[l] - dsnap.dual_lo[l] +
                                     dsnap.dual_hi[l] + dsnap.dual_link[l]);
    out.slack_lo = r - s.step_slack_lo * (2.0 * dsnap.dual_lo[l].cwiseProduct(r));
    out.slack_hi = q - s.step_slack_hi * (2.0 * dsnap.dual_hi[l].cwiseProduct(q));
    return out;
}

void master_update(PrimalState& p, DualState& d, const Polytope& poly,
                   const RegionProblem& prob, const Schedule& s,
                   const std::vector<int>& active) {
    const int S = poly.size();
    // plane slacks
    for (int i = 0; i < S; ++i)
        p.plane_slack[i] -= s.step_plane_slack * 2.0 * d.dual_plane[i] * p.plane_slack[i];
    // x
    Vec gx = Vec::Zero(p.x.size());
    for (int l = 0; l < prob.region_count(); ++l) {
        const auto& rows = prob.rows(l);
        for (size_t i = 0; i < rows.size(); ++i) gx[rows[i]] -= d.dual_link[l][i];
    }
    for (int i = 0; i < S; ++i) gx += d.dual_plane[i] * poly.planes[i].normal;
    p.x -= s.step_x * gx;
    // box duals, active workers only
    for (int l : active) {
        const Vec& mu = p.local[l];
        Vec lo = (-mu.array() - prob.rho + p.slack_lo[l].array().square()).matrix();
        d.dual_lo[l] = (d.dual_lo[l] + s.step_dual_lo * (lo - s.reg_lo * d.dual_lo[l]))
                           .cwiseMax(0.0);
        Vec hi = (mu.array() - prob.rho + p.slack_hi[l].array().square()).matrix();
        d.dual_hi[l] = (d.dual_hi[l] + s.step_dual_hi * (hi - s.reg_hi * d.dual_hi[l]))
                           .cwiseMax(0.0);
    }
    // link duals
    for (int l : active) {
        Vec link = p.local[l];
        const auto& rows = prob.rows(l);
        for (size_t i = 0; i < rows.size(); ++i) link[i] -= p.x[rows[i]];
        d.dual_link[l] += s.step_dual_link * (link - s.reg_link * d.dual_link[l]);
        if (s.project_link_dual) d.dual_link[l] = d.dual_link[l].cwiseMax(0.0);
    }
    // plane duals
    for (int i = 0; i < S; ++i) {
        const double res = poly.planes[i].residual(p.x) + p.plane_slack[i] * p.plane_slack[i];
        d.dual_plane[i] = std::max(
            0.0, d.dual_plane[i] + s.step_dual_plane * (res - s.reg_plane * d.dual_plane[i]));
    }
}

double grad_norm_sq(const PrimalState& p, const DualState& d, const Polytope& poly,
                    const RegionProblem& prob) {
    double total = 0.0;
    Vec gx = Vec::Zero(p.x.size());
    for (int l = 0; l < prob.region_count(); ++l) {
        const Vec& mu = p.local[l];
        Vec gmu = 2.0 * mu - 2.0 * prob.y_local[l] - d.dual_lo[l] + d.dual_hi[l] + d.dual_link[l];
        total += gmu.squaredNorm();
        total += (2.0 * d.dual_lo[l].cwiseProduct(p.slack_lo[l])).squaredNorm();
        total += (2.0 * d.dual_hi[l].cwiseProduct(p.slack_hi[l])).squaredNorm();
        Vec lo = (-mu.array() - prob.rho + p.slack_lo[l].array().square()).matrix();
        Vec hi = (mu.array() - prob.rho + p.slack_hi[l].array().square()).matrix();
        total += lo.squaredNorm() + hi.squaredNorm();
        Vec link = mu;
        const auto& rows = prob.rows(l);
        for (size_t i = 0; i < rows.size(); ++i) {
            link[i] -= p.x[rows[i]];
            gx[rows[i]] -= d.dual_link[l][i];
        }
        total += link.squaredNorm();
    }
    for (int s = 0; s < poly.size(); ++s) {
        const double q = p.plane_slack[s];
        const double g = d.dual_plane[s];
        total += (2.0 * g * q) * (2.0 * g * q);
        const double res = poly.planes[s].residual(p.x) + q * q;
        total += res * res;
        gx += g * poly.planes[s].normal;
    }
    total += gx.squaredNorm();
    return total;
}

double objective_value(const PrimalState& p, const RegionProblem& prob) {
    double val = 0.0;
    for (int l = 0; l < prob.region_count(); ++l)
        val += 2.0 * prob.y_local[l].dot(p.local[l]) - p.local[l].squaredNorm();
    return val;
}

bool state_bounded(const PrimalState& p, const DualState& d, double cap) {
    auto ok = [cap](const Vec& v) {
        return v.allFinite() && v.cwiseAbs().maxCoeff() <= cap;
    };
    for (const auto& v : p.local)
        if (!ok(v)) return false;
    for (const auto& v : p.slack_lo)
        if (!ok(v)) return false;
    for (const auto& v : p.slack_hi)
        if (!ok(v)) return false;
    if (!ok(p.x)) return false;
    for (double q : p.plane_slack)
        if (!std::isfinite(q) || std::abs(q) > cap) return false;
    for (const auto& v : d.dual_lo)
        if (!ok(v)) return false;
    for (const auto& v : d.dual_hi)
        if (!ok(v)) return false;
    for (const auto& v : d.dual_link)
        if (!ok(v)) return false;
    for (double g : d.dual_plane)
        if (!std::isfinite(g) || std::abs(g) > cap) return false;
    return true;
}

void refresh_slacks(PrimalState& p, const Polytope& poly, const RegionProblem& prob) {
    for (int l = 0; l < prob.region_count(); ++l) {
        for (int i = 0; i < p.local[l].size(); ++i) {
            const double lo_target = prob.rho + p.local[l][i];
            const double hi_target = prob.rho - p.local[l][i];
            double& r = p.slack_lo[l][i];
            double& q = p.slack_hi[l][i];
            if (lo_target > r * r) r = std::sqrt(lo_target);
            if (hi_target > q * q) q = std::sqrt(hi_target);
        }
    }
    for (int s = 0; s < poly.size(); ++s) {
        const double target = -poly.planes[s].residual(p.x);
        double& q = p.plane_slack[s];
        if (target > q * q) q = std::sqrt(target);
    }
}

}  // namespace triadic
