#include "kbie/error.hpp"
#include "kbie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <sstream>

namespace kbie {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross2(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
    auto orient = [](const Point& a, const Point& b, const Point& c) { return cross2(b - a, c - a); };
    auto on_segment = [](const Point& a, const Point& b, const Point& c) {
        return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
               std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
    };
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

void check_polygon(const std::vector<Point>& v) {
    const std::size_t n = v.size();
    if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((v[i] - v[j]).norm() == 0.0) throw GeometryError("polygon has repeated vertices");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                throw GeometryError("polygon is self-intersecting");
        }
    }
    if (std::abs(signed_area(v)) == 0.0) throw GeometryError("polygon has zero area");
}

std::string index_id(std::size_t i) { return std::to_string(i); }

void push_segments(Mesh& mesh, const Point& a, const Point& b, std::size_t count, const Point& normal,
                   double weight_per_cell = -1.0) {
    const double len = (b - a).norm();
    for (std::size_t j = 0; j < count; ++j) {
        const Point p = a + (b - a) * (static_cast<double>(j) / count);
        const Point q = a + (b - a) * (static_cast<double>(j + 1) / count);
        QuadratureCell c;
        c.id = index_id(mesh.cells.size());
        c.patch = make_segment(p, q, weight_per_cell > 0.0 ? weight_per_cell : len / count);
        c.normal = normal;
        mesh.cells.push_back(std::move(c));
    }
}

Point left_normal(const Point& a, const Point& b) {
    const Point t = (b - a).normalized();
    return Point(-t.y(), t.x(), 0.0);
}

Mesh mesh_circle(const CircleBoundary& c, std::size_t n) {
    Mesh mesh;
    for (std::size_t j = 0; j < n; ++j) {
        const double t0 = two_pi * j / n, t1 = two_pi * (j + 1) / n;
        const Point a = c.center + c.radius * Point(std::cos(t0), std::sin(t0), 0.0);
        const Point b = c.center + c.radius * Point(std::cos(t1), std::sin(t1), 0.0);
        QuadratureCell cell;
        cell.id = index_id(j);
        cell.patch = make_segment(a, b, two_pi * c.radius / n);
        const double tm = 0.5 * (t0 + t1);
        cell.normal = Point(std::cos(tm), std::sin(tm), 0.0);
        mesh.cells.push_back(std::move(cell));
    }
    mesh.closed_boundary = true;
    return mesh;
}

Mesh mesh_polygon(const PolygonBoundary& poly, std::size_t target) {
    check_polygon(poly.vertices);
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    const bool ccw = signed_area(v) > 0.0;
    double perimeter = 0.0;
    for (std::size_t i = 0; i < n; ++i) perimeter += (v[(i + 1) % n] - v[i]).norm();
    Mesh mesh;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % n];
        const double len = (b - a).norm();
        const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(target * len / perimeter)));
        const Point inward = left_normal(a, b);
        push_segments(mesh, a, b, count, ccw ? Point(-inward) : inward);
    }
    mesh.closed_boundary = true;
    return mesh;
}

Mesh mesh_sphere(const SphereBoundary& s, std::size_t target) {
    int level = s.refinement;
    if (level <= 0) {
        level = 0;
        while (8 * (std::size_t{1} << (2 * level)) < target) ++level;
    }
    if (level > 9) throw ResourceError("sphere refinement too deep");
    using Tri = std::array<Point, 3>;
    std::vector<Tri> tris;
    const Point px = Point::UnitX(), py = Point::UnitY(), pz = Point::UnitZ();
    for (int sx : {1, -1})
        for (int sy : {1, -1})
            for (int sz : {1, -1}) {
                Tri t{Point(sx * px), Point(sy * py), Point(sz * pz)};
                if (sx * sy * sz < 0) std::swap(t[1], t[2]);
                tris.push_back(t);
            }
    for (int l = 0; l < level; ++l) {
        std::vector<Tri> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const Point ab = (t[0] + t[1]).normalized(), bc = (t[1] + t[2]).normalized(),
                        ca = (t[2] + t[0]).normalized();
            next.push_back({t[0], ab, ca});
            next.push_back({ab, t[1], bc});
            next.push_back({ca, bc, t[2]});
            next.push_back({ab, bc, ca});
        }
        tris.swap(next);
    }
    Mesh mesh;
    for (const auto& t : tris) {
        QuadratureCell c;
        c.id = index_id(mesh.cells.size());
        c.patch = make_triangle(s.center + s.radius * t[0], s.center + s.radius * t[1],
                                s.center + s.radius * t[2]);
        c.normal = (c.patch.barycenter - s.center).normalized();
        mesh.cells.push_back(std::move(c));
    }
    mesh.closed_boundary = true;
    return mesh;
}

Mesh mesh_disc(const DiscVolume& d, std::size_t target) {
    const auto rings = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::sqrt(target / std::numbers::pi))));
    const double h = d.radius / rings;
    Mesh mesh;
    for (std::size_t i = 0; i < rings; ++i) {
        const double r0 = i * h, r1 = (i + 1) * h;
        const auto sectors = i == 0 ? std::size_t{3}
                                    : static_cast<std::size_t>(std::lround(two_pi * (i + 0.5)));
        for (std::size_t j = 0; j < sectors; ++j) {
            QuadratureCell c;
            c.id = index_id(mesh.cells.size());
            c.patch = make_sector(d.center, r0, r1, two_pi * j / sectors, two_pi * (j + 1) / sectors);
            mesh.cells.push_back(std::move(c));
        }
    }
    return mesh;
}

Mesh mesh_square(const SquareVolume& s, std::size_t target) {
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(double(target)))));
    const double h = s.side / m;
    Mesh mesh;
    for (std::size_t iy = 0; iy < m; ++iy)
        for (std::size_t ix = 0; ix < m; ++ix) {
            const Point a = s.corner + Point(ix * h, iy * h, 0.0);
            QuadratureCell c;
            c.id = index_id(mesh.cells.size());
            c.patch = make_quad(a, a + Point(h, 0, 0), a + Point(h, h, 0), a + Point(0, h, 0));
            c.patch.weight = h * h;
            mesh.cells.push_back(std::move(c));
        }
    return mesh;
}

}  // namespace

double ObstacleSpec::hausdorff_dim() const {
    return std::visit(overloaded{
                          [](const CircleBoundary&) { return 1.0; },
                          [](const PolygonBoundary&) { return 1.0; },
                          [](const SphereBoundary&) { return 2.0; },
                          [](const SegmentScreen&) { return 1.0; },
                          [](const VeeScreen&) { return 1.0; },
                          [](const DiscVolume&) { return 2.0; },
                          [](const SquareVolume&) { return 2.0; },
                          [](const IfsAttractorSpec& s) {
                              std::vector<double> r;
                              for (const auto& m : s.ifs.maps) r.push_back(m.ratio);
                              return moran_dimension(r);
                          },
                      },
                      variant);
}

bool ObstacleSpec::is_closed_boundary() const {
    return std::holds_alternative<CircleBoundary>(variant) || std::holds_alternative<PolygonBoundary>(variant) ||
           std::holds_alternative<SphereBoundary>(variant);
}

std::string ObstacleSpec::kind_name() const {
    static constexpr const char* names[] = {"circle_boundary", "polygon_boundary", "sphere_boundary",
                                            "segment_screen",  "vee_screen",       "disc_volume",
                                            "square_volume",   "ifs_attractor"};
    return names[variant.index()];
}

void validate(const ObstacleSpec& spec) {
    const int n = spec.ambient_dim;
    if (n != 2 && n != 3) throw DomainError("ambient dimension must be 2 or 3");
    const bool planar_only = !std::holds_alternative<SphereBoundary>(spec.variant) &&
                             !std::holds_alternative<IfsAttractorSpec>(spec.variant);
    if (planar_only && n != 2) throw DomainError(spec.kind_name() + " requires ambient dimension 2");
    if (std::holds_alternative<SphereBoundary>(spec.variant) && n != 3)
        throw DomainError("sphere_boundary requires ambient dimension 3");
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
    };
    std::visit(overloaded{
                   [&](const CircleBoundary& c) { positive(c.radius, "radius"); },
                   [&](const PolygonBoundary& p) { check_polygon(p.vertices); },
                   [&](const SphereBoundary& s) { positive(s.radius, "radius"); },
                   [&](const SegmentScreen& s) {
                       if ((s.b - s.a).norm() == 0.0) throw GeometryError("segment screen has zero length");
                   },
                   [&](const VeeScreen& v) {
                       if ((v.arm1 - v.apex).norm() == 0.0 || (v.arm2 - v.apex).norm() == 0.0)
                           throw GeometryError("vee screen arm has zero length");
                       if (std::abs(cross2(v.arm1 - v.apex, v.arm2 - v.apex)) == 0.0 &&
                           (v.arm1 - v.apex).dot(v.arm2 - v.apex) > 0.0)
                           throw GeometryError("vee screen arms overlap");
                   },
                   [&](const DiscVolume& d) { positive(d.radius, "radius"); },
                   [&](const SquareVolume& s) { positive(s.side, "side"); },
                   [&](const IfsAttractorSpec& s) {
                       if (s.level < 0) throw DomainError("IFS level must be nonnegative");
                       if (n == 2)
                           for (const auto& m : s.ifs.maps)
                               if (m.translation.z() != 0.0)
                                   throw DomainError("planar IFS translations must have z = 0");
                   },
               },
               spec.variant);
    const double d = spec.hausdorff_dim();
    if (!(d > n - 2) || d > n)
        throw ModelError("dimension too small for kernel: need n-2 < d <= n, got d=" + std::to_string(d) +
                         " in n=" + std::to_string(n));
}

Mesh mesh_shape(const ObstacleSpec& spec, std::size_t target) {
    if (target < 4) throw DomainError("mesh_shape: target_cells must be at least 4");
    validate(spec);
    Mesh mesh = std::visit(
        overloaded{
            [&](const CircleBoundary& c) { return mesh_circle(c, target); },
            [&](const PolygonBoundary& p) { return mesh_polygon(p, target); },
            [&](const SphereBoundary& s) { return mesh_sphere(s, target); },
            [&](const SegmentScreen& s) {
                Mesh m;
                push_segments(m, s.a, s.b, target, left_normal(s.a, s.b));
                return m;
            },
            [&](const VeeScreen& v) {
                const double l1 = (v.arm1 - v.apex).norm(), l2 = (v.arm2 - v.apex).norm();
                const auto n1 = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(target * l1 / (l1 + l2))));
                const auto n2 = std::max<std::size_t>(1, target - std::min(target - 1, n1));
                Mesh m;
                push_segments(m, v.apex, v.arm1, n1, left_normal(v.apex, v.arm1));
                push_segments(m, v.apex, v.arm2, n2, left_normal(v.apex, v.arm2));
                return m;
            },
            [&](const DiscVolume& d) { return mesh_disc(d, target); },
            [&](const SquareVolume& s) { return mesh_square(s, target); },
            [&](const IfsAttractorSpec&) -> Mesh {
                throw DomainError("mesh_shape: use ifs_refine for IFS attractors");
            },
        },
        spec.variant);
    mesh.ambient_dim = spec.ambient_dim;
    mesh.hausdorff_dim = spec.hausdorff_dim();
    for (const auto& c : mesh.cells) mesh.total_measure += c.weight();
    mesh.bounding_radius = bounding_radius(mesh);
    return mesh;
}

Mesh build_mesh(const ObstacleSpec& spec, std::size_t target) {
    if (const auto* s = std::get_if<IfsAttractorSpec>(&spec.variant)) {
        validate(spec);
        return ifs_refine(s->ifs, s->level, spec.ambient_dim);
    }
    return mesh_shape(spec, target);
}

Mesh mesh_union(const std::vector<Mesh>& parts) {
    if (parts.empty()) throw DomainError("mesh_union: no components");
    Mesh out;
    out.ambient_dim = parts.front().ambient_dim;
    out.hausdorff_dim = parts.front().hausdorff_dim;
    std::vector<std::pair<Point, Point>> boxes;
    for (const auto& m : parts) {
        if (m.ambient_dim != out.ambient_dim || m.hausdorff_dim != out.hausdorff_dim)
            throw GeometryError("mesh_union: components must share ambient and Hausdorff dimension");
        if (m.cells.empty()) throw GeometryError("mesh_union: empty component");
        Point lo = Point::Constant(1e300), hi = Point::Constant(-1e300);
        for (const auto& c : m.cells) {
            lo = lo.cwiseMin(c.barycenter() - Point::Constant(0.5 * c.diameter()));
            hi = hi.cwiseMax(c.barycenter() + Point::Constant(0.5 * c.diameter()));
        }
        for (const auto& [blo, bhi] : boxes)
            if ((lo.array() <= bhi.array()).all() && (blo.array() <= hi.array()).all())
                throw GeometryError("mesh_union: components are not disjoint");
        boxes.emplace_back(lo, hi);
        for (const auto& c : m.cells) {
            out.cells.push_back(c);
            out.cells.back().id = std::to_string(boxes.size() - 1) + ":" + c.id;
        }
        out.total_measure += m.total_measure;
        out.probability_measure = out.probability_measure || m.probability_measure;
        if (m.attractor && !out.attractor) out.attractor = m.attractor;
    }
    // Cells of a second attractor would dangle; only one IFS component is supported.
    std::size_t ifs_parts = 0;
    for (const auto& m : parts) ifs_parts += m.attractor ? 1 : 0;
    if (ifs_parts > 1) throw GeometryError("mesh_union: at most one IFS component is supported");
    out.bounding_radius = bounding_radius(out);
    return out;
}

double bounding_radius(const Mesh& mesh) {
    double r = 0.0;
    for (const auto& c : mesh.cells) r = std::max(r, c.barycenter().norm() + 0.5 * c.diameter());
    return r;
}

std::uint64_t Mesh::fingerprint() const {
    // FNV-1a over the raw bits of barycenters and weights.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const auto& c : cells) {
        mix(c.barycenter().x());
        mix(c.barycenter().y());
        mix(c.barycenter().z());
        mix(c.weight());
    }
    return h;
}

std::string mesh_table(const Mesh& mesh) {
    std::ostringstream os;
    char buf[64];
    for (const auto& c : mesh.cells) {
        os << c.id;
        for (int i = 0; i < mesh.ambient_dim; ++i) {
            std::snprintf(buf, sizeof buf, " %.17g", c.barycenter()[i]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " %.17g %.17g\n", c.weight(), c.diameter());
        os << buf;
    }
    return os.str();
}

}  // namespace kbie
