#include "triadic/cutplane.hpp"

#include <cmath>
#include <ostream>

namespace triadic {

double Polytope::max_residual(const Vec& x) const {
    double worst = 0.0;
    bool first = true;
    for (const auto& p : planes) {
        const double r = p.residual(x);
        if (first || r > worst) worst = r;
        first = false;
    }
    return planes.empty() ? 0.0 : worst;
}

bool Polytope::append(CuttingPlane plane) {
    if (plane.normal.norm() < 1e-12) {
        ++dropped_degenerate;
        return false;
    }
    if (full()) {
        ++dropped_capacity;
        return false;
    }
    normal_sq_sum_ += plane.normal.squaredNorm();
    planes.push_back(std::move(plane));
    return true;
}

bool Polytope::near_duplicate(const CuttingPlane& plane, double tol) const {
    for (const auto& p : planes) {
        if (p.normal.size() != plane.normal.size()) continue;
        const double scale = std::max(1.0, p.normal.norm());
        if ((p.normal - plane.normal).norm() + std::abs(p.offset - plane.offset) < tol * scale)
            return true;
    }
    return false;
}

bool violated(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg) {
    return constraint_value(m, i, x, cfg) > constraint_delta(m, i);
}

CuttingPlane generate_plane(const SystemModel& m, int i, const Vec& x, const InnerSolverConfig& cfg) {
    const double g = constraint_value(m, i, x, cfg);
    Vec b = constraint_gradient(m, i, x, cfg);
    if (b.norm() < 1e-12) throw std::domain_error("degenerate cutting plane: zero gradient");
    const double kappa = g - b.dot(x) - constraint_delta(m, i);
    return CuttingPlane{std::move(b), kappa};
}

SetUpdateResult update_sets(Polytope& poly, const std::vector<CuttingPlane>& fresh,
                            std::vector<double>& plane_slack, std::vector<double>& plane_dual,
                            const Vec& x) {
    SetUpdateResult res;
    for (const auto& plane : fresh) {
        if (poly.full()) {
            ++poly.dropped_capacity;
            ++res.at_capacity;
            continue;
        }
        const double r = plane.residual(x);
        if (poly.append(plane)) {
            plane_slack.push_back(std::sqrt(std::max(0.0, -r)));
            plane_dual.push_back(0.0);
            ++res.added;
        }
    }
    return res;
}

void write_planes_csv(const Polytope& poly, std::ostream& out) {
    const int M = poly.planes.empty() ? 0 : static_cast<int>(poly.planes.front().normal.size());
    out << "s";
    for (int i = 1; i <= M; ++i) out << ",b_" << i;
    out << ",kappa\n";
    for (int s = 0; s < poly.size(); ++s) {
        out << s;
        for (int i = 0; i < M; ++i) out << ',' << poly.planes[s].normal[i];
        out << ',' << poly.planes[s].offset << '\n';
    }
}

}  // namespace triadic
