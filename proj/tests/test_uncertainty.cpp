#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "triadic/ieee14.hpp"
#include "triadic/oracles.hpp"
#include "triadic/uncertainty.hpp"

using namespace triadic;

namespace {

Vec randn(int n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

InnerSolverConfig tight_cfg(int iters = 500) {
    InnerSolverConfig cfg;
    cfg.iterations = iters;
    return cfg;
}

UncertaintySet test_ellipsoid() {
    Vec c(5);
    c << -1.0, 0.1, 0.3, -0.2, 0.0;
    return make_ellipsoid(c, 0.36);
}

}  // namespace

TEST_CASE("ellipsoid protection closed form") {
    UncertaintySet s = test_ellipsoid();
    CHECK(protection_exact(s, Vec::Zero(5)) == 0.0);
    Vec x = Vec::Zero(5);
    x[0] = 3;
    x[1] = 4;
    s.radius = 1.0;
    CHECK(protection_exact(s, x) == doctest::Approx(5.0));
}

TEST_CASE("dnorm protection sums the largest magnitudes") {
    Vec c = Vec::Zero(5);
    UncertaintySet s = make_dnorm(c, 4, 0.5);
    Vec x = Vec::Ones(5);
    CHECK(protection_exact(s, x) == doctest::Approx(2.0));
    // brute-force oracle: best budget-subset with signed magnitudes
    Rng rng = make_rng(11);
    for (int t = 0; t < 50; ++t) {
        Vec xr = randn(5, rng);
        double best = 0.0;
        for (int bits = 0; bits < 32; ++bits) {
            int n = 0;
            double val = 0.0;
            for (int j = 0; j < 5; ++j)
                if ((bits >> j) & 1) {
                    ++n;
                    val += 0.5 * std::abs(xr[j]);
                }
            if (n <= 4) best = std::max(best, val);
        }
        CHECK(protection_exact(s, xr) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("polyhedron protection matches the vertex oracle") {
    const Mat D = ieee14_poly_D();
    const auto nominals = ieee14_region4_nominals();
    Rng rng = make_rng(12);
    for (int col = 0; col < 3; ++col) {
        UncertaintySet s = make_polyhedron(nominals[col], D, ieee14_poly_c(col));
        for (int t = 0; t < 20; ++t) {
            Vec x = randn(5, rng);
            const double oracle = oracle_protection_polyhedron(D, ieee14_poly_c(col), nominals[col], x);
            CHECK(protection_exact(s, x) == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("protection nonnegativity, homogeneity, convexity probes") {
    Rng rng = make_rng(13);
    std::vector<UncertaintySet> sets = {test_ellipsoid(), make_dnorm(randn(5, rng), 3, 0.4)};
    for (const auto& s : sets) {
        for (int t = 0; t < 30; ++t) {
            Vec x1 = randn(5, rng), x2 = randn(5, rng);
            const double p1 = protection_exact(s, x1);
            const double p2 = protection_exact(s, x2);
            CHECK(p1 >= 0.0);
            CHECK(protection_exact(s, Vec(2.5 * x1)) == doctest::Approx(2.5 * p1).epsilon(1e-9));
            CHECK(protection_exact(s, Vec(0.5 * (x1 + x2))) <= 0.5 * (p1 + p2) + 1e-9);
        }
    }
}

TEST_CASE("inner estimate stays at the start when x is zero") {
    UncertaintySet s = test_ellipsoid();
    AlmResult r = alm_inner_solve(s, Vec::Zero(5), tight_cfg(100));
    CHECK((r.column - s.center).norm() == doctest::Approx(0.0));
}

TEST_CASE("zero iterations return the start point") {
    UncertaintySet s = test_ellipsoid();
    Rng rng = make_rng(14);
    Vec x = randn(5, rng);
    InnerSolverConfig cfg;
    cfg.iterations = 0;
    AlmResult r = alm_inner_solve(s, x, cfg);
    CHECK((r.column - s.center).norm() == 0.0);
    Vec h0 = s.center + Vec::Constant(5, 0.1);
    // custom starts are respected (the set owns feasibility, not the start)
    AlmResult r2 = alm_inner_solve(s, x, cfg, &h0);
    CHECK((r2.column - h0).norm() == 0.0);
}

TEST_CASE("inner estimator reaches the ellipsoid closed form") {
    UncertaintySet s = test_ellipsoid();
    Vec x = Vec::Zero(5);
    x[0] = 1.0;
    AlmResult r = alm_inner_solve(s, x, tight_cfg(500));
    CHECK((r.column - s.center).dot(x) == doctest::Approx(0.36).epsilon(1e-3));
}

TEST_CASE("surrogate limits: nominal at D=0, worst case for large D") {
    UncertaintySet s = test_ellipsoid();
    Rng rng = make_rng(15);
    InnerSolverConfig zero;
    zero.iterations = 0;
    for (int t = 0; t < 10; ++t) {
        Vec x = randn(5, rng);
        CHECK(surrogate_value(s, x, zero) == doctest::Approx(s.center.dot(x)).epsilon(1e-12));
        const double exact = s.center.dot(x) + 0.36 * x.norm();
        CHECK(surrogate_value(s, x, tight_cfg(500)) == doctest::Approx(exact).epsilon(2e-3));
        CHECK(surrogate_value(s, Vec::Zero(5), tight_cfg(50)) == 0.0);
    }
}

TEST_CASE("mirrored surrogate equals the base at the flipped point") {
    UncertaintySet s = test_ellipsoid();
    Rng rng = make_rng(16);
    InnerSolverConfig cfg = tight_cfg(60);
    for (int t = 0; t < 10; ++t) {
        Vec x = randn(5, rng);
        CHECK(surrogate_value(s, x, cfg, true) ==
              doctest::Approx(surrogate_value(s, Vec(-x), cfg, false)).epsilon(1e-12));
        Vec gm = surrogate_gradient(s, x, cfg, true);
        Vec gb = surrogate_gradient(s, Vec(-x), cfg, false);
        CHECK((gm + gb).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

namespace {

Vec fd_gradient(const UncertaintySet& s, const Vec& x, const InnerSolverConfig& cfg, bool mirrored,
                double h = 1e-5) {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (surrogate_value(s, xp, cfg, mirrored) - surrogate_value(s, xm, cfg, mirrored)) /
               (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("surrogate gradient: D=0 gives the nominal column") {
    UncertaintySet s = test_ellipsoid();
    InnerSolverConfig zero;
    zero.iterations = 0;
    Rng rng = make_rng(17);
    Vec x = randn(5, rng);
    CHECK((surrogate_gradient(s, x, zero) - s.center).norm() == doctest::Approx(0.0));
}

TEST_CASE("surrogate gradient at zero x with inactive constraints is the nominal") {
    UncertaintySet s = test_ellipsoid();
    InnerSolverConfig cfg = tight_cfg(50);
    CHECK((surrogate_gradient(s, Vec::Zero(5), cfg) - s.center).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("through-iterate gradients match central differences") {
    Rng rng = make_rng(18);
    const auto nominals = ieee14_region4_nominals();
    UncertaintySet ell = test_ellipsoid();
    UncertaintySet poly = make_polyhedron(nominals[0], ieee14_poly_D(), ieee14_poly_c(0));
    InnerSolverConfig cfg = tight_cfg(50);
    for (int t = 0; t < 10; ++t) {
        Vec x = randn(5, rng);
        for (bool mirrored : {false, true}) {
            Vec ga = surrogate_gradient(ell, x, cfg, mirrored);
            Vec gn = fd_gradient(ell, x, cfg, mirrored);
            CHECK((ga - gn).norm() / std::max(1.0, gn.norm()) < 1e-4);
            Vec pa = surrogate_gradient(poly, x, cfg, mirrored);
            Vec pn = fd_gradient(poly, x, cfg, mirrored);
            CHECK((pa - pn).norm() / std::max(1.0, pn.norm()) < 1e-4);
        }
    }
}

TEST_CASE("frozen-gradient variant drops the sensitivity term") {
    UncertaintySet s = test_ellipsoid();
    InnerSolverConfig cfg = tight_cfg(50);
    InnerSolverConfig frozen = cfg;
    frozen.frozen_gradient = true;
    Rng rng = make_rng(19);
    Vec x = randn(5, rng);
    AlmResult r = alm_inner_solve(s, x, cfg);
    CHECK((surrogate_gradient(s, x, frozen) - r.column).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // through-iterates includes a correction, so the two generally differ
    CHECK((surrogate_gradient(s, x, cfg) - r.column).norm() > 1e-6);
}

TEST_CASE("general-constraint sets run through the same estimator") {
    // encode the ellipsoid as a user-supplied constraint and compare
    UncertaintySet ell = test_ellipsoid();
    UncertaintySet gen;
    gen.kind = SetKind::General;
    gen.center = ell.center;
    const Vec center = ell.center;
    gen.constraints.push_back(GeneralConstraint{
        [center](const Vec& h) { return (h - center).squaredNorm() - 0.36 * 0.36; },
        [center](const Vec& h) { return Vec(2.0 * (h - center)); },
        [](const Vec& h) { return Mat(2.0 * Mat::Identity(h.size(), h.size())); }});
    Rng rng = make_rng(20);
    InnerSolverConfig cfg = tight_cfg(200);
    for (int t = 0; t < 5; ++t) {
        Vec x = randn(5, rng);
        CHECK(surrogate_value(gen, x, cfg) ==
              doctest::Approx(surrogate_value(ell, x, cfg)).epsilon(1e-10));
        CHECK((surrogate_gradient(gen, x, cfg) - surrogate_gradient(ell, x, cfg)).norm() < 1e-9);
    }
}

TEST_CASE("ALM consistency improves with the iteration budget") {
    UncertaintySet s = test_ellipsoid();
    Rng rng = make_rng(21);
    Vec x = randn(5, rng);
    const double exact = s.center.dot(x) + 0.36 * x.norm();
    const double e50 = std::abs(surrogate_value(s, x, tight_cfg(50)) - exact);
    const double e500 = std::abs(surrogate_value(s, x, tight_cfg(500)) - exact);
    CHECK(e500 <= e50 + 1e-12);
    CHECK(e500 < 1e-3);
}

TEST_CASE("set validation") {
    Vec c = Vec::Ones(3);
    CHECK_THROWS(make_ellipsoid(c, -1.0).validate());
    UncertaintySet d = make_dnorm(c, 7, 0.5);
    CHECK_THROWS(d.validate());
    // polyhedron must contain its nominal center
    Mat D(2, 3);
    CHECK_THROWS(protection_exact(make_ellipsoid(c, 1.0), Vec::Ones(5)));
    Mat box(6, 3);
    box << Mat::Identity(3, 3), -Mat::Identity(3, 3);
    Vec bound = Vec::Constant(6, -1.0);  // empty-looking box excludes the center
    CHECK_THROWS(make_polyhedron(c, box, bound).validate());
}
