#include "triadic/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace triadic {

namespace {

bool is_box_pattern(const Mat& D, std::vector<double>& lo, std::vector<double>& hi, const Vec& c) {
    const int m = static_cast<int>(D.cols());
    lo.assign(m, -std::numeric_limits<double>::infinity());
    hi.assign(m, std::numeric_limits<double>::infinity());
    for (int r = 0; r < D.rows(); ++r) {
        int nz = -1;
        for (int j = 0; j < m; ++j) {
            if (D(r, j) == 0.0) continue;
            if (nz >= 0) return false;
            nz = j;
        }
        if (nz < 0) return false;
        const double a = D(r, nz);
        if (a == 1.0)
            hi[nz] = std::min(hi[nz], c[r]);
        else if (a == -1.0)
            lo[nz] = std::max(lo[nz], -c[r]);
        else
            return false;
    }
    for (int j = 0; j < m; ++j)
        if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]) || lo[j] > hi[j]) return false;
    return true;
}

}  // namespace

double oracle_protection_polyhedron(const Mat& D, const Vec& c, const Vec& hbar, const Vec& x) {
    require(D.rows() == c.size() && D.cols() == hbar.size() && hbar.size() == x.size(),
            "oracle_protection_polyhedron: dimension mismatch");
    const int m = static_cast<int>(D.cols());
    std::vector<double> lo, hi;
    if (is_box_pattern(D, lo, hi, c)) {
        require(m <= 24, "box enumeration limited to dimension 24");
        // walk every corner
        double best = -std::numeric_limits<double>::infinity();
        for (std::uint64_t bits = 0; bits < (1ULL << m); ++bits) {
            double val = 0.0;
            for (int j = 0; j < m; ++j) {
                const double hj = (bits >> j) & 1 ? hi[j] : lo[j];
                val += (hj - hbar[j]) * x[j];
            }
            best = std::max(best, val);
        }
        return best;
    }
    require(m <= 8, "non-box polyhedra limited to dimension 8");
    // enumerate basic solutions of row subsets
    std::vector<int> idx(m);
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == m) {
            Mat sub(m, m);
            Vec rhs(m);
            for (int r = 0; r < m; ++r) {
                sub.row(r) = D.row(idx[r]);
                rhs[r] = c[idx[r]];
            }
            Eigen::FullPivLU<Mat> lu(sub);
            if (!lu.isInvertible()) return;
            Vec h = lu.solve(rhs);
            if (((D * h - c).array() <= 1e-9).all()) {
                best = std::max(best, (h - hbar).dot(x));
                found = true;
            }
            return;
        }
        for (int r = start; r <= static_cast<int>(D.rows()) - (m - depth); ++r) {
            idx[depth] = r;
            rec(r + 1, depth + 1);
        }
    };
    rec(0, 0);
    require(found, "polyhedron appears empty or unbounded");
    return best;
}

namespace {

// one subgradient projection pass over every violated exact constraint
void project_constraints(const SystemModel& model, Vec& x) {
    for (int i = 0; i < model.constraint_count(); ++i) {
        const double v = constraint_exact(model, i, x) - constraint_delta(model, i);
        if (v <= 0.0) continue;
        const auto& set = model.sets[i % model.states()];
        Vec g = robust_constraint_exact_gradient(set, x, i >= model.states());
        const double n2 = g.squaredNorm();
        if (n2 > 1e-18) x -= (v / n2) * g;
    }
}

bool feasible_exact(const SystemModel& model, const Vec& x, double tol) {
    if ((x.cwiseAbs().array() > model.rho_u + tol).any()) return false;
    for (int i = 0; i < model.constraint_count(); ++i)
        if (constraint_exact(model, i, x) > constraint_delta(model, i) + tol) return false;
    return true;
}

}  // namespace

double oracle_score(const SystemModel& model, const Vec& y, const OracleConfig& cfg) {
    const int M = model.meters();
    Rng rng = make_rng(cfg.seed, 0x04ac1e, 0);
    std::uniform_real_distribution<double> box(-model.rho_u, model.rho_u);
    double best = 0.0;  // x = 0 is always feasible
    for (int s = 0; s < cfg.starts; ++s) {
        Vec x(M);
        for (int i = 0; i < M; ++i) x[i] = box(rng);
        for (int it = 0; it < cfg.iters; ++it) {
            x += cfg.step * (2.0 * y - 2.0 * x);
            x = x.cwiseMax(-model.rho_u).cwiseMin(model.rho_u);
            project_constraints(model, x);
        }
        for (int it = 0; it < cfg.polish_iters; ++it) {
            x = x.cwiseMax(-model.rho_u).cwiseMin(model.rho_u);
            project_constraints(model, x);
        }
        if (feasible_exact(model, x, 1e-7))
            best = std::max(best, 2.0 * x.dot(y) - x.squaredNorm());
    }
    return best;
}

double oracle_score_grid(const SystemModel& model, const Vec& y, double grid_step) {
    const int M = model.meters();
    require(M <= 6, "grid oracle limited to dimension 6");
    const int n = static_cast<int>(std::floor(2.0 * model.rho_u / grid_step)) + 1;
    std::vector<int> counter(M, 0);
    Vec x(M);
    double best = 0.0;
    bool done = false;
    while (!done) {
        for (int j = 0; j < M; ++j) x[j] = -model.rho_u + counter[j] * grid_step;
        if (feasible_exact(model, x, 1e-9))
            best = std::max(best, 2.0 * x.dot(y) - x.squaredNorm());
        int j = 0;
        while (j < M && ++counter[j] == n) {
            counter[j] = 0;
            ++j;
        }
        done = (j == M);
    }
    return best;
}

double baseline_score(const Mat& assumed_H, double rho_u, const Vec& y, int iters) {
    // orthonormal basis of the orthogonal complement of the column space
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(assumed_H);
    const int rank = static_cast<int>(cod.rank());
    const int M = static_cast<int>(assumed_H.rows());
    Eigen::HouseholderQR<Mat> qr(assumed_H);
    Mat Q = qr.householderQ();
    Mat basis = Q.rightCols(M - rank);  // assumes full-rank assumed_H
    auto project = [&](const Vec& v) { return Vec(basis * (basis.transpose() * v)); };

    Vec x = project(y).cwiseMax(-rho_u).cwiseMin(rho_u);
    const double step = 0.25;
    for (int it = 0; it < iters; ++it) {
        x += step * (2.0 * y - 2.0 * x);
        x = project(x);
        x = x.cwiseMax(-rho_u).cwiseMin(rho_u);
    }
    x = project(x);
    x = x.cwiseMax(-rho_u).cwiseMin(rho_u);
    x = project(x);
    return std::max(0.0, 2.0 * x.dot(y) - x.squaredNorm());
}

std::vector<double> baseline_score_series(const Mat& assumed_H, double rho_u,
                                          const ObservationStream& stream, int iters) {
    std::vector<double> scores;
    scores.reserve(stream.horizon());
    for (const Vec& y : stream.observations)
        scores.push_back(baseline_score(assumed_H, rho_u, y, iters));
    return scores;
}

ExactPlaneSolve exact_plane_solve(const RegionProblem& prob, const Polytope& poly) {
    const int M = prob.x_dim();
    const int L = prob.region_count();
    const int S = poly.size();

    // objective in x-space: x' G x - 2 yhat' x with diagonal coverage counts
    Vec gdiag = Vec::Zero(M);
    Vec yhat = Vec::Zero(M);
    for (int l = 0; l < L; ++l) {
        const auto& rows = prob.rows(l);
        for (size_t i = 0; i < rows.size(); ++i) {
            gdiag[rows[i]] += 1.0;
            yhat[rows[i]] += prob.y_local[l][i];
        }
    }

    Mat B(S, M);
    Vec kap(S);
    for (int s = 0; s < S; ++s) {
        B.row(s) = poly.planes[s].normal.transpose();
        kap[s] = poly.planes[s].offset;
    }

    // scaled ADMM: u = x (box), w = B x (half-spaces)
    const double rho = 2.0;
    Mat A = (2.0 * gdiag.asDiagonal()).toDenseMatrix() + rho * Mat::Identity(M, M);
    if (S) A += rho * B.transpose() * B;
    Eigen::LLT<Mat> llt(A);
    Vec x = Vec::Zero(M), u = Vec::Zero(M), du = Vec::Zero(M);
    Vec w = Vec::Zero(S), dw = Vec::Zero(S);
    for (int it = 0; it < 20000; ++it) {
        Vec rhs = 2.0 * yhat + rho * (u - du);
        if (S) rhs += rho * B.transpose() * (w - dw);
        x = llt.solve(rhs);
        Vec unew = (x + du).cwiseMax(-prob.rho).cwiseMin(prob.rho);
        du += x - unew;
        u = unew;
        if (S) {
            Vec bx = B * x;
            Vec wnew = (bx + dw).cwiseMin(-kap);
            dw += bx - wnew;
            w = wnew;
        }
        if (it % 100 == 99) {
            const double pres = (x - u).norm() + (S ? (B * x - w).norm() : 0.0);
            if (pres < 1e-12) break;
        }
    }

    // active-set polish: equality-constrained QP on the identified set
    std::vector<int> act_lo, act_hi, act_pl;
    const double atol = 1e-7;
    for (int j = 0; j < M; ++j) {
        if (u[j] <= -prob.rho + atol && du[j] < -1e-12) act_lo.push_back(j);
        if (u[j] >= prob.rho - atol && du[j] > 1e-12) act_hi.push_back(j);
    }
    for (int s = 0; s < S; ++s)
        if (w[s] >= -kap[s] - atol && dw[s] > 1e-12) act_pl.push_back(s);

    const int na = static_cast<int>(act_lo.size() + act_hi.size() + act_pl.size());
    Vec box_mult_lo = Vec::Zero(M), box_mult_hi = Vec::Zero(M), gam = Vec::Zero(S);
    if (na > 0) {
        Mat K = Mat::Zero(M + na, M + na);
        Vec rhs = Vec::Zero(M + na);
        K.topLeftCorner(M, M) = (2.0 * gdiag.asDiagonal()).toDenseMatrix();
        rhs.head(M) = 2.0 * yhat;
        int r = 0;
        auto add_row = [&](const Vec& a, double b) {
            K.block(M + r, 0, 1, M) = a.transpose();
            K.block(0, M + r, M, 1) = a;
            rhs[M + r] = b;
            ++r;
        };
        for (int j : act_lo) add_row(-Vec::Unit(M, j), prob.rho);
        for (int j : act_hi) add_row(Vec::Unit(M, j), prob.rho);
        for (int s : act_pl) add_row(Vec(B.row(s).transpose()), -kap[s]);
        Vec sol = K.fullPivLu().solve(rhs);
        x = sol.head(M);
        int idx = M;
        for (int j : act_lo) box_mult_lo[j] = sol[idx++];
        for (int j : act_hi) box_mult_hi[j] = sol[idx++];
        for (int s : act_pl) gam[s] = sol[idx++];
        // negative multipliers mean the guess was too greedy; fall back to
        // the ADMM duals which are correct to its tolerance
        bool clean = true;
        for (int j : act_lo) clean &= box_mult_lo[j] >= -1e-9;
        for (int j : act_hi) clean &= box_mult_hi[j] >= -1e-9;
        for (int s : act_pl) clean &= gam[s] >= -1e-9;
        if (!clean) {
            x = u;
            box_mult_lo.setZero();
            box_mult_hi.setZero();
            gam.setZero();
            for (int j : act_lo) box_mult_lo[j] = std::max(0.0, -rho * du[j]);
            for (int j : act_hi) box_mult_hi[j] = std::max(0.0, rho * du[j]);
            for (int s : act_pl) gam[s] = std::max(0.0, rho * dw[s]);
        } else {
            for (int j = 0; j < M; ++j) {
                box_mult_lo[j] = std::max(0.0, box_mult_lo[j]);
                box_mult_hi[j] = std::max(0.0, box_mult_hi[j]);
            }
            for (int s = 0; s < S; ++s) gam[s] = std::max(0.0, gam[s]);
        }
    }
    x = x.cwiseMax(-prob.rho).cwiseMin(prob.rho);

    // assemble the full saddle state with per-region multipliers
    ExactPlaneSolve out;
    out.x = x;
    out.primal.x = x;
    out.primal.plane_slack.resize(S);
    out.dual.dual_plane.resize(S);
    for (int s = 0; s < S; ++s) {
        const double res = B.row(s).dot(x) + kap[s];
        out.primal.plane_slack[s] = std::sqrt(std::max(0.0, -res));
        out.dual.dual_plane[s] = gam[s];
    }
    Vec plane_pull = Vec::Zero(M);
    for (int s = 0; s < S; ++s) plane_pull += gam[s] * Vec(B.row(s).transpose());

    std::vector<bool> box_assigned(M, false);
    for (int l = 0; l < L; ++l) {
        const auto& rows = prob.rows(l);
        const int m = static_cast<int>(rows.size());
        Vec mu(m), rl(m), pl(m), lam = Vec::Zero(m), alp = Vec::Zero(m), bet(m);
        for (int i = 0; i < m; ++i) {
            const int j = rows[i];
            mu[i] = x[j];
            rl[i] = std::sqrt(std::max(0.0, prob.rho + mu[i]));
            pl[i] = std::sqrt(std::max(0.0, prob.rho - mu[i]));
            if (!box_assigned[j]) {
                lam[i] = box_mult_lo[j];
                alp[i] = box_mult_hi[j];
                box_assigned[j] = true;
            }
            bet[i] = 2.0 * prob.y_local[l][i] - 2.0 * mu[i] + lam[i] - alp[i];
        }
        out.primal.local.push_back(std::move(mu));
        out.primal.slack_lo.push_back(std::move(rl));
        out.primal.slack_hi.push_back(std::move(pl));
        out.dual.dual_lo.push_back(std::move(lam));
        out.dual.dual_hi.push_back(std::move(alp));
        out.dual.dual_link.push_back(std::move(bet));
    }
    out.value = objective_value(out.primal, prob);
    out.grad_sq = grad_norm_sq(out.primal, out.dual, poly, prob);
    return out;
}

}  // namespace triadic
