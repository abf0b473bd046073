#include "triadic/ieee14.hpp"

namespace triadic {

Mat ieee14_region4_H() {
    Mat H(5, 3);
    H << -1, 3, -1,
          0, -1, 0,
          0, 0, -1,
          0, -1, 1,
          0, -1, 2;
    return H;
}

std::vector<Vec> ieee14_region4_nominals() {
    std::vector<Vec> h(3, Vec(5));
    h[0] << -1.0, 0.1, 0.3, -0.2, 0.0;
    h[1] << 3.0, -0.7, 0.2, -1.3, -0.9;
    h[2] << -1.1, 0.2, -0.6, 0.7, 2.0;
    return h;
}

Mat ieee14_poly_D() {
    Mat D(10, 5);
    D << Mat::Identity(5, 5), -Mat::Identity(5, 5);
    return D;
}

Vec ieee14_poly_c(int i) {
    require(i >= 0 && i < 3, "region-4 column index out of range");
    Vec c(10);
    switch (i) {
        case 0: c << -0.5, 0.5, 0.5, 0.5, 0.5, 1.5, 0.5, 0.5, 0.5, 0.5; break;
        case 1: c << 3.5, -0.5, 0.5, -0.5, -0.5, -2.5, 1.5, 0.5, 1.5, 1.5; break;
        default: c << -0.5, 0.5, -0.5, 1.5, 2.5, 1.5, 0.5, 1.5, -0.5, -1.5; break;
    }
    return c;
}

namespace {

// Reconstructed blocks for regions 1-3 (the benchmark publishes only the
// fourth). DC-flow-style rows: line differences plus weighted injections,
// full column rank. Only the column spaces matter to the detector.
Mat region_block(int l) {
    Mat H(5, 3);
    switch (l) {
        case 0:
            H << 1, -1, 0,
                 0, 1, -1,
                 2, -1, 0,
                 0, -1, 2,
                 1, 0, -1;
            break;
        case 1:
            H << 1, 0, -1,
                 -1, 1, 0,
                 0, -1, 1,
                 2, -1, -1,
                 0, 1, -2;
            break;
        default:
            H << 1, -1, 0,
                 1, 0, -1,
                 0, 1, -1,
                 -1, 3, -2,
                 2, 0, -1;
            break;
    }
    return H;
}

}  // namespace

SystemModel load_ieee14(SetKind variant, double delta, double sigma_n, double rho_u) {
    const int L = 4;
    const int block_rows = 5;
    const int block_cols = 3;
    const int M = L * block_rows;
    const int N = L * block_cols;

    SystemModel m;
    m.H = Mat::Zero(M, N);
    for (int l = 0; l < 3; ++l)
        m.H.block(l * block_rows, l * block_cols, block_rows, block_cols) = region_block(l);
    m.H.block(3 * block_rows, 3 * block_cols, block_rows, block_cols) = ieee14_region4_H();

    m.sigma_n = sigma_n;
    m.rho_u = rho_u;
    m.delta = Vec::Constant(N, delta);
    for (int l = 0; l < L; ++l) {
        std::vector<int> rows;
        for (int r = 0; r < block_rows; ++r) rows.push_back(l * block_rows + r);
        m.regions.push_back(std::move(rows));
    }

    std::vector<int> support;
    for (int r = 0; r < block_rows; ++r) support.push_back(3 * block_rows + r);
    const auto nominals = ieee14_region4_nominals();

    for (int j = 0; j < N; ++j) {
        if (j < 3 * block_cols) {
            // regions 1-3: columns exactly known
            Vec col = m.H.col(j);
            m.nominal_columns.push_back(col);
            m.sets.push_back(make_singleton(col));
            continue;
        }
        const int jj = j - 3 * block_cols;
        Vec center = Vec::Zero(M);
        for (int r = 0; r < block_rows; ++r) center[support[r]] = nominals[jj][r];
        m.nominal_columns.push_back(center);
        switch (variant) {
            case SetKind::Singleton:
                m.sets.push_back(make_singleton(center));
                break;
            case SetKind::Ellipsoid:
                m.sets.push_back(make_ellipsoid(center, kIeee14EllipsoidRadius, support));
                break;
            case SetKind::DNorm:
                m.sets.push_back(make_dnorm(center, kIeee14DnormBudget, kIeee14DnormMag, support));
                break;
            case SetKind::Polyhedron:
                m.sets.push_back(make_polyhedron(center, ieee14_poly_D(), ieee14_poly_c(jj), support));
                break;
            case SetKind::General:
                require(false, "no general-set preset for the 14-bus model");
        }
    }
    m.validate();
    return m;
}

}  // namespace triadic
