#include "triadic/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace triadic {

Vec UncertaintySet::gather(const Vec& x) const {
    if (support.empty()) return x;
    Vec out(support.size());
    for (size_t i = 0; i < support.size(); ++i) out[i] = x[support[i]];
    return out;
}

void UncertaintySet::scatter_add(Vec& into, const Vec& sub) const {
    if (support.empty()) {
        into += sub;
        return;
    }
    for (size_t i = 0; i < support.size(); ++i) into[support[i]] += sub[i];
}

Vec UncertaintySet::center_local() const { return gather(center); }

void UncertaintySet::validate() const {
    require(center.size() > 0, "uncertainty set needs a nominal center");
    for (int r : support) require(r >= 0 && r < dim(), "support row out of range");
    const int m = support_dim();
    switch (kind) {
        case SetKind::Singleton:
            break;
        case SetKind::Ellipsoid:
            require(radius >= 0.0, "ellipsoid radius must be >= 0");
            break;
        case SetKind::DNorm:
            require(dnorm_budget >= 0 && dnorm_budget <= m, "D-norm budget out of range");
            require(dnorm_mag >= 0.0, "D-norm magnitude must be >= 0");
            break;
        case SetKind::Polyhedron: {
            require(poly_D.rows() == poly_c.size(), "polyhedron row mismatch");
            require(poly_D.cols() == m, "polyhedron dimension mismatch");
            // nominal center must be a member, otherwise p(x) can go negative
            Vec slack = poly_c - poly_D * center_local();
            require(slack.minCoeff() >= -1e-9, "nominal center outside polyhedron");
            break;
        }
        case SetKind::General:
            require(!constraints.empty(), "general set needs constraints");
            break;
    }
}

UncertaintySet make_singleton(const Vec& column) {
    UncertaintySet s;
    s.kind = SetKind::Singleton;
    s.center = column;
    return s;
}

UncertaintySet make_ellipsoid(const Vec& center, double radius, std::vector<int> support) {
    UncertaintySet s;
    s.kind = SetKind::Ellipsoid;
    s.center = center;
    s.radius = radius;
    s.support = std::move(support);
    return s;
}

UncertaintySet make_dnorm(const Vec& center, int budget, double mag, std::vector<int> support) {
    UncertaintySet s;
    s.kind = SetKind::DNorm;
    s.center = center;
    s.dnorm_budget = budget;
    s.dnorm_mag = mag;
    s.support = std::move(support);
    return s;
}

UncertaintySet make_polyhedron(const Vec& center, const Mat& D, const Vec& c, std::vector<int> support) {
    UncertaintySet s;
    s.kind = SetKind::Polyhedron;
    s.center = center;
    s.poly_D = D;
    s.poly_c = c;
    s.support = std::move(support);
    return s;
}

namespace {

// Canonical differentiable encoding in support-local coordinates.
// Variables v = (u [, z]) where u is the column deviation and z are the
// D-norm budget coordinates. Constraints: affine rows A v <= b, an
// optional ball ||u||^2 <= r2, and user-supplied functions on the column.
struct Encoding {
    int vdim = 0;
    int udim = 0;
    Mat A;
    Vec b;
    bool ball = false;
    double ball_r2 = 0.0;
    const std::vector<GeneralConstraint>* user = nullptr;
    Vec center_local;  // user constraints act on center + u
    Vec v0;

    int constraint_count() const {
        return static_cast<int>(A.rows()) + (ball ? 1 : 0) +
               (user ? static_cast<int>(user->size()) : 0);
    }
};

Encoding build_encoding(const UncertaintySet& set) {
    Encoding e;
    const int m = set.support_dim();
    e.udim = m;
    e.center_local = set.center_local();
    switch (set.kind) {
        case SetKind::Singleton:
            e.vdim = m;
            e.A.resize(0, m);
            e.b.resize(0);
            break;
        case SetKind::Ellipsoid:
            e.vdim = m;
            e.A.resize(0, m);
            e.b.resize(0);
            e.ball = true;
            e.ball_r2 = set.radius * set.radius;
            break;
        case SetKind::Polyhedron:
            // D (center + u) <= c
            e.vdim = m;
            e.A = set.poly_D;
            e.b = set.poly_c - set.poly_D * e.center_local;
            break;
        case SetKind::DNorm: {
            // |u_j| <= mag * z_j, 0 <= z_j <= 1, sum z <= budget
            e.vdim = 2 * m;
            const int rows = 4 * m + 1;
            e.A = Mat::Zero(rows, e.vdim);
            e.b = Vec::Zero(rows);
            for (int j = 0; j < m; ++j) {
                e.A(2 * j, j) = 1.0;
                e.A(2 * j, m + j) = -set.dnorm_mag;
                e.A(2 * j + 1, j) = -1.0;
                e.A(2 * j + 1, m + j) = -set.dnorm_mag;
                e.A(2 * m + 2 * j, m + j) = 1.0;
                e.b[2 * m + 2 * j] = 1.0;
                e.A(2 * m + 2 * j + 1, m + j) = -1.0;
            }
            for (int j = 0; j < m; ++j) e.A(4 * m, m + j) = 1.0;
            e.b[4 * m] = static_cast<double>(set.dnorm_budget);
            break;
        }
        case SetKind::General:
            e.vdim = m;
            e.A.resize(0, m);
            e.b.resize(0);
            e.user = &set.constraints;
            break;
    }
    e.v0 = Vec::Zero(e.vdim);
    if (set.kind == SetKind::DNorm) {
        const double z0 = std::min(1.0, static_cast<double>(set.dnorm_budget) / std::max(1, m));
        for (int j = 0; j < m; ++j) e.v0[m + j] = z0;
    }
    return e;
}

struct AlmState {
    Vec v;
    Vec phi;
    // forward sensitivities, allocated only when gradients are requested
    Mat J;                 // dv/dx, vdim x udim
    std::vector<Vec> Phi;  // dphi_c/dx
};

// One pass of the estimator: exactly D alternating steps of gradient
// descent on the internally sign-flipped augmented Lagrangian (descent on
// -(h-center)'x + penalty performs ascent on the protection objective),
// then the multiplier update with the plus-projection.
AlmState alm_run(const Encoding& e, const Vec& x_sub, const InnerSolverConfig& cfg,
                 bool with_sensitivity, const Vec* v_init = nullptr) {
    const int C = e.constraint_count();
    const int affine = static_cast<int>(e.A.rows());
    const double sigma = cfg.penalty;
    AlmState s;
    s.v = v_init ? *v_init : e.v0;
    s.phi = Vec::Zero(C);
    if (with_sensitivity) {
        s.J = Mat::Zero(e.vdim, e.udim);
        s.Phi.assign(C, Vec::Zero(e.udim));
    }

    Vec cvals(C);
    std::vector<Vec> grads(C);
    for (int d = 0; d < cfg.iterations; ++d) {
        // constraint values and gradients at the current iterate
        for (int c = 0; c < affine; ++c) {
            cvals[c] = e.A.row(c).dot(s.v) - e.b[c];
        }
        int idx = affine;
        if (e.ball) {
            cvals[idx] = s.v.head(e.udim).squaredNorm() - e.ball_r2;
            ++idx;
        }
        if (e.user) {
            Vec h = e.center_local + s.v.head(e.udim);
            for (const auto& uc : *e.user) {
                cvals[idx] = uc.value(h);
                ++idx;
            }
        }

        Vec step = Vec::Zero(e.vdim);
        step.head(e.udim) -= x_sub;  // gradient of the flipped objective
        Mat Jstep;
        if (with_sensitivity) Jstep = Mat::Zero(e.vdim, e.udim);

        for (int c = 0; c < C; ++c) {
            const double m = s.phi[c] / sigma + cvals[c];
            if (m <= 0.0) continue;
            Vec gc;
            if (c < affine) {
                gc = e.A.row(c).transpose();
            } else if (e.ball && c == affine) {
                gc = Vec::Zero(e.vdim);
                gc.head(e.udim) = 2.0 * s.v.head(e.udim);
            } else {
                Vec h = e.center_local + s.v.head(e.udim);
                Vec g = (*e.user)[c - affine - (e.ball ? 1 : 0)].grad(h);
                gc = Vec::Zero(e.vdim);
                gc.head(e.udim) = g;
            }
            step += sigma * m * gc;
            if (with_sensitivity) {
                // dm/dx = Phi_c/sigma + J' grad(c)
                Vec dm = s.Phi[c] / sigma + s.J.transpose() * gc;
                Jstep += sigma * (gc * dm.transpose());
                if (e.ball && c == affine) {
                    Jstep.topRows(e.udim) += sigma * m * 2.0 * s.J.topRows(e.udim);
                } else if (c >= affine && e.user) {
                    Vec h = e.center_local + s.v.head(e.udim);
                    Mat H = (*e.user)[c - affine - (e.ball ? 1 : 0)].hess(h);
                    Jstep.topRows(e.udim) += sigma * m * H * s.J.topRows(e.udim);
                }
            }
        }

        s.v -= cfg.step_h * step;
        if (with_sensitivity) {
            Mat dObj = Mat::Zero(e.vdim, e.udim);
            dObj.topRows(e.udim) = -Mat::Identity(e.udim, e.udim);
            s.J -= cfg.step_h * (dObj + Jstep);
        }

        // multiplier step at the refreshed iterate
        for (int c = 0; c < affine; ++c) cvals[c] = e.A.row(c).dot(s.v) - e.b[c];
        idx = affine;
        if (e.ball) {
            cvals[idx] = s.v.head(e.udim).squaredNorm() - e.ball_r2;
            ++idx;
        }
        if (e.user) {
            Vec h = e.center_local + s.v.head(e.udim);
            for (const auto& uc : *e.user) {
                cvals[idx] = uc.value(h);
                ++idx;
            }
        }
        for (int c = 0; c < C; ++c) {
            const double next = s.phi[c] + cfg.step_mult * cvals[c];
            if (next > 0.0) {
                if (with_sensitivity) {
                    Vec gc;
                    if (c < affine) {
                        gc = e.A.row(c).transpose();
                    } else if (e.ball && c == affine) {
                        gc = Vec::Zero(e.vdim);
                        gc.head(e.udim) = 2.0 * s.v.head(e.udim);
                    } else {
                        Vec h = e.center_local + s.v.head(e.udim);
                        Vec g = (*e.user)[c - affine - (e.ball ? 1 : 0)].grad(h);
                        gc = Vec::Zero(e.vdim);
                        gc.head(e.udim) = g;
                    }
                    s.Phi[c] += cfg.step_mult * (s.J.transpose() * gc);
                }
                s.phi[c] = next;
            } else {
                s.phi[c] = 0.0;
                if (with_sensitivity) s.Phi[c].setZero();
            }
        }
    }
    return s;
}

// Enumerate the vertices of {D h <= c} by solving square subsystems.
// Only intended for small dimensions.
double vertex_enum_protection(const Mat& D, const Vec& c, const Vec& center, const Vec& x) {
    const int m = static_cast<int>(D.cols());
    const int rows = static_cast<int>(D.rows());
    require(m <= 8, "vertex enumeration limited to dimension 8");
    require(rows >= m, "polyhedron must have at least dim rows");
    std::vector<int> idx(m);
    double best = 0.0;
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
                const double val = (h - center).dot(x);
                if (!found || val > best) best = val;
                found = true;
            }
            return;
        }
        for (int r = start; r <= rows - (m - depth); ++r) {
            idx[depth] = r;
            rec(r + 1, depth + 1);
        }
    };
    rec(0, 0);
    require(found, "polyhedron appears empty or unbounded");
    return best;
}

double dnorm_protection(const UncertaintySet& set, const Vec& x_sub) {
    Vec a = x_sub.cwiseAbs();
    std::vector<double> mags(a.data(), a.data() + a.size());
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double sum = 0.0;
    for (int j = 0; j < set.dnorm_budget && j < static_cast<int>(mags.size()); ++j) sum += mags[j];
    return set.dnorm_mag * sum;
}

// Indices of the budget-many largest |x| entries, ties by lower index.
std::vector<int> dnorm_top(const UncertaintySet& set, const Vec& x_sub) {
    std::vector<int> order(x_sub.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(x_sub[a]) > std::abs(x_sub[b]);
    });
    order.resize(std::min<size_t>(order.size(), set.dnorm_budget));
    return order;
}

double alm_tight_protection(const UncertaintySet& set, const Vec& x_sub) {
    // protection is positively homogeneous, so normalize for accuracy
    const double scale = x_sub.norm();
    if (scale < 1e-300) return 0.0;
    InnerSolverConfig tight;
    tight.iterations = 20000;
    tight.penalty = 10.0;
    tight.step_h = 0.02;
    tight.step_mult = 0.5;
    Encoding e = build_encoding(set);
    AlmState s = alm_run(e, Vec(x_sub / scale), tight, false);
    return s.v.head(e.udim).dot(x_sub / scale) * scale;
}

}  // namespace

AlmResult alm_inner_solve(const UncertaintySet& set, const Vec& x,
                          const InnerSolverConfig& cfg, const Vec* h_init) {
    require(x.size() == set.dim(), "alm_inner_solve: dimension mismatch");
    Encoding e = build_encoding(set);
    Vec x_sub = set.gather(x);
    std::optional<Vec> v_init;
    if (h_init) {
        require(h_init->size() == set.dim(), "alm_inner_solve: h_init dimension mismatch");
        Vec v0 = e.v0;
        v0.head(e.udim) = set.gather(*h_init) - e.center_local;
        v_init = v0;
    }
    AlmState s = alm_run(e, x_sub, cfg, false, v_init ? &*v_init : nullptr);
    AlmResult out;
    out.column = set.center;
    set.scatter_add(out.column, s.v.head(e.udim));
    out.multipliers = s.phi;
    if (e.vdim > e.udim) out.lifted = s.v.tail(e.vdim - e.udim);
    return out;
}

double protection_exact(const UncertaintySet& set, const Vec& x, bool mirrored) {
    require(x.size() == set.dim(), "protection_exact: dimension mismatch");
    Vec x_sub = set.gather(x);
    if (mirrored) x_sub = -x_sub;
    switch (set.kind) {
        case SetKind::Singleton:
            return 0.0;
        case SetKind::Ellipsoid:
            return set.radius * x_sub.norm();
        case SetKind::DNorm:
            return dnorm_protection(set, x_sub);
        case SetKind::Polyhedron:
            if (set.support_dim() <= 8)
                return vertex_enum_protection(set.poly_D, set.poly_c, set.center_local(), x_sub);
            return alm_tight_protection(set, x_sub);
        case SetKind::General:
            return alm_tight_protection(set, x_sub);
    }
    return 0.0;
}

double surrogate_value(const UncertaintySet& set, const Vec& x,
                       const InnerSolverConfig& cfg, bool mirrored) {
    require(x.size() == set.dim(), "surrogate_value: dimension mismatch");
    Vec x_sub = set.gather(x);
    if (mirrored) x_sub = -x_sub;
    const double nominal = set.center_local().dot(x_sub);
    if (set.kind == SetKind::Singleton) return nominal;
    if (set.kind == SetKind::DNorm) return nominal + dnorm_protection(set, x_sub);
    Encoding e = build_encoding(set);
    AlmState s = alm_run(e, x_sub, cfg, false);
    return nominal + s.v.head(e.udim).dot(x_sub);
}

Vec surrogate_gradient(const UncertaintySet& set, const Vec& x,
                       const InnerSolverConfig& cfg, bool mirrored) {
    require(x.size() == set.dim(), "surrogate_gradient: dimension mismatch");
    Vec x_sub = set.gather(x);
    if (mirrored) x_sub = -x_sub;

    Vec grad;
    if (set.kind == SetKind::Singleton) {
        grad = set.center;
    } else if (set.kind == SetKind::DNorm) {
        grad = set.center;
        Vec sub = Vec::Zero(set.support_dim());
        for (int j : dnorm_top(set, x_sub)) {
            if (x_sub[j] > 0.0)
                sub[j] = set.dnorm_mag;
            else if (x_sub[j] < 0.0)
                sub[j] = -set.dnorm_mag;
        }
        set.scatter_add(grad, sub);
    } else {
        Encoding e = build_encoding(set);
        AlmState s = alm_run(e, x_sub, cfg, !cfg.frozen_gradient);
        Vec sub = s.v.head(e.udim);
        if (!cfg.frozen_gradient) sub += s.J.topRows(e.udim).transpose() * x_sub;
        grad = set.center;
        set.scatter_add(grad, sub);
    }
    return mirrored ? Vec(-grad) : grad;
}

double robust_constraint_exact(const UncertaintySet& set, const Vec& x, bool mirrored) {
    const double sign = mirrored ? -1.0 : 1.0;
    return sign * set.center.dot(x) + protection_exact(set, x, mirrored);
}

Vec robust_constraint_exact_gradient(const UncertaintySet& set, const Vec& x, bool mirrored) {
    const double sign = mirrored ? -1.0 : 1.0;
    Vec x_sub = set.gather(x);
    if (mirrored) x_sub = -x_sub;
    Vec grad = sign * set.center;
    Vec sub = Vec::Zero(set.support_dim());
    switch (set.kind) {
        case SetKind::Singleton:
            break;
        case SetKind::Ellipsoid: {
            const double n = x_sub.norm();
            if (n > 1e-12) sub = set.radius * x_sub / n;
            break;
        }
        case SetKind::DNorm:
            for (int j : dnorm_top(set, x_sub)) {
                if (x_sub[j] > 0.0)
                    sub[j] = set.dnorm_mag;
                else if (x_sub[j] < 0.0)
                    sub[j] = -set.dnorm_mag;
            }
            break;
        case SetKind::Polyhedron:
        case SetKind::General: {
            // subgradient via the tight estimate's worst-case column
            InnerSolverConfig tight;
            tight.iterations = 20000;
            tight.step_h = 0.02;
            tight.step_mult = 0.5;
            Encoding e = build_encoding(set);
            const double scale = std::max(1e-12, x_sub.norm());
            AlmState s = alm_run(e, Vec(x_sub / scale), tight, false);
            sub = s.v.head(e.udim);
            break;
        }
    }
    if (mirrored) {
        Vec tmp = Vec::Zero(set.dim());
        set.scatter_add(tmp, sub);
        return Vec(grad - tmp);
    }
    set.scatter_add(grad, sub);
    return grad;
}

}  // namespace triadic
