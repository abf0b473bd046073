#pragma once

#include "triadic/model.hpp"

namespace triadic {

/// Region-4 block of the 14-bus benchmark: the published 5x3 matrix.
Mat ieee14_region4_H();
/// Published estimates of the three region-4 columns.
std::vector<Vec> ieee14_region4_nominals();
/// Box polyhedron bounds for region-4 column i (0-based): D = [I; -I].
Mat ieee14_poly_D();
Vec ieee14_poly_c(int i);

inline constexpr double kIeee14EllipsoidRadius = 0.36;
inline constexpr int kIeee14DnormBudget = 4;
inline constexpr double kIeee14DnormMag = 0.5;

/// Four-region 14-bus detection model. Regions 1-3 use a reconstructed
/// DC-flow-style block (their columns are taken as exactly known); region
/// 4 carries the published matrix with uncertainty of the chosen kind on
/// its three columns. Pass SetKind::Singleton for an exact-columns model.
SystemModel load_ieee14(SetKind variant = SetKind::Ellipsoid, double delta = 0.1,
                        double sigma_n = 0.25, double rho_u = 1.0);

}  // namespace triadic
