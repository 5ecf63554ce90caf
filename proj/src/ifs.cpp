#include "kbie/error.hpp"
#include "kbie/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace kbie {

double moran_dimension(const std::vector<double>& ratios) {
    if (ratios.empty()) throw DomainError("moran_dimension: empty ratio list");
    double rho_max = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) throw DomainError("moran_dimension: ratios must lie in (0,1)");
        rho_max = std::max(rho_max, r);
    }
    auto excess = [&ratios](double d) {
        double s = 0.0;
        for (double r : ratios) s += std::pow(r, d);
        return s - 1.0;
    };
    // sum_j rho_j^d <= M rho_max^d, so the root lies below log M / log(1/rho_max).
    double lo = 0.0;
    double hi = std::log(static_cast<double>(ratios.size())) / -std::log(rho_max) + 1e-12;
    if (excess(lo) <= 0.0) return 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::shared_ptr<const IfsAttractor> make_attractor(const IFSSystem& ifs) {
    const std::size_t m = ifs.maps.size();
    if (m == 0) throw DomainError("IFS: no maps");
    if (m > kMaxChildren)
        throw DomainError("IFS: at most " + std::to_string(kMaxChildren) + " maps are supported");

    auto out = std::make_shared<IfsAttractor>();
    std::vector<double> ratios;
    for (const auto& s : ifs.maps) {
        if (!(s.ratio > 0.0 && s.ratio < 1.0)) throw DomainError("IFS: ratios must lie in (0,1)");
        if (!std::isfinite(s.angle) || !s.translation.allFinite())
            throw DomainError("IFS: non-finite map parameters");
        Affine a;
        a.linear = s.ratio * Eigen::AngleAxisd(s.angle, Point::UnitZ()).toRotationMatrix();
        a.offset = s.translation;
        a.scale = s.ratio;
        out->maps.push_back(a);
        ratios.push_back(s.ratio);
    }
    out->dimension = moran_dimension(ratios);
    double total = 0.0;
    for (double r : ratios) {
        out->mass.push_back(std::pow(r, out->dimension));
        total += out->mass.back();
    }
    for (double& w : out->mass) w /= total;

    // Barycenter of the self-similar measure: fixed point of the mass-averaged map.
    Eigen::Matrix3d lhs = Eigen::Matrix3d::Identity();
    Point rhs = Point::Zero();
    for (std::size_t j = 0; j < m; ++j) {
        lhs -= out->mass[j] * out->maps[j].linear;
        rhs += out->mass[j] * out->maps[j].offset;
    }
    out->barycenter = lhs.partialPivLu().solve(rhs);

    // Covariance: fixed point of C = sum_j p_j (L_j C L_j^T + d_j d_j^T), a contraction.
    Eigen::Matrix3d shift = Eigen::Matrix3d::Zero();
    for (std::size_t j = 0; j < m; ++j) {
        const Point d = out->maps[j](out->barycenter) - out->barycenter;
        shift += out->mass[j] * d * d.transpose();
    }
    Eigen::Matrix3d cov = shift;
    for (int it = 0; it < 2000; ++it) {
        Eigen::Matrix3d next = shift;
        for (std::size_t j = 0; j < m; ++j)
            next += out->mass[j] * out->maps[j].linear * cov * out->maps[j].linear.transpose();
        const double change = (next - cov).norm();
        cov = next;
        if (change <= 1e-16 * cov.norm()) break;
    }
    out->covariance = cov;

    // Diameter from a dense sample of attractor points (images of map fixed points).
    std::vector<Point> pts;
    for (const auto& a : out->maps)
        pts.push_back((Eigen::Matrix3d::Identity() - a.linear).partialPivLu().solve(a.offset));
    while (pts.size() * m <= 4096) {
        std::vector<Point> next;
        next.reserve(pts.size() * m);
        for (const auto& a : out->maps)
            for (const auto& p : pts) next.push_back(a(p));
        pts.swap(next);
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, (pts[i] - pts[j]).norm());
    if (!(diam > 0.0)) throw DomainError("IFS: attractor is a single point");
    out->diameter = diam;
    return out;
}

namespace {

void collect_cells(const IfsAttractor& a, const Affine& map, double weight, int level,
                   std::string& address, std::vector<QuadratureCell>& cells) {
    if (level == 0) {
        QuadratureCell c;
        c.id = address.empty() ? std::string("root") : address;
        c.patch = make_ifs_patch(a, map, weight);
        cells.push_back(std::move(c));
        return;
    }
    const bool digits = a.maps.size() <= 10;
    for (std::size_t j = 0; j < a.maps.size(); ++j) {
        const auto saved = address.size();
        if (!digits && !address.empty()) address += '.';
        address += std::to_string(j);
        collect_cells(a, map.then(a.maps[j]), weight * a.mass[j], level - 1, address, cells);
        address.resize(saved);
    }
}

}  // namespace

Mesh ifs_refine(const IFSSystem& ifs, int level, int ambient_dim) {
    if (level < 0) throw DomainError("ifs_refine: negative level");
    if (ambient_dim != 2 && ambient_dim != 3) throw DomainError("ifs_refine: ambient dimension must be 2 or 3");
    auto attractor = make_attractor(ifs);
    const double count = std::pow(static_cast<double>(attractor->maps.size()), level);
    if (count > 1e6) throw ResourceError("ifs_refine: more than 10^6 cells requested");

    Mesh mesh;
    mesh.ambient_dim = ambient_dim;
    mesh.hausdorff_dim = attractor->dimension;
    mesh.probability_measure = true;
    mesh.cells.reserve(static_cast<std::size_t>(count));
    std::string address;
    collect_cells(*attractor, Affine{}, 1.0, level, address, mesh.cells);
    for (const auto& c : mesh.cells) mesh.total_measure += c.weight();
    mesh.attractor = std::move(attractor);
    mesh.bounding_radius = bounding_radius(mesh);
    return mesh;
}

}  // namespace kbie
