#include "kbie/error.hpp"
#include "kbie/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kbie {

Affine Affine::then(const Affine& inner) const {
    Affine out;
    out.linear = linear * inner.linear;
    out.offset = linear * inner.offset + offset;
    out.scale = scale * inner.scale;
    return out;
}

namespace {

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

Point polar(const Point& center, double r, double theta) {
    return center + Point(r * std::cos(theta), r * std::sin(theta), 0.0);
}

}  // namespace

Patch make_segment(const Point& a, const Point& b, double weight) {
    Patch p;
    p.shape = PatchShape::segment;
    p.v[0] = a;
    p.v[1] = b;
    p.barycenter = 0.5 * (a + b);
    p.diameter = (b - a).norm();
    p.weight = weight;
    return p;
}

Patch make_triangle(const Point& a, const Point& b, const Point& c) {
    Patch p;
    p.shape = PatchShape::triangle;
    p.v[0] = a;
    p.v[1] = b;
    p.v[2] = c;
    p.barycenter = (a + b + c) / 3.0;
    p.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    p.weight = triangle_area(a, b, c);
    return p;
}

Patch make_quad(const Point& a, const Point& b, const Point& c, const Point& d) {
    Patch p;
    p.shape = PatchShape::quad;
    p.v = {a, b, c, d};
    const double w1 = triangle_area(a, b, c);
    const double w2 = triangle_area(a, c, d);
    p.weight = w1 + w2;
    p.barycenter = (w1 * (a + b + c) / 3.0 + w2 * (a + c + d) / 3.0) / p.weight;
    p.diameter = std::max((c - a).norm(), (d - b).norm());
    return p;
}

Patch make_sector(const Point& center, double r0, double r1, double t0, double t1) {
    Patch p;
    p.shape = PatchShape::sector;
    p.v[0] = center;
    p.sector = {r0, r1, t0, t1};
    const double span = t1 - t0;
    p.weight = 0.5 * (r1 * r1 - r0 * r0) * span;
    const double half = 0.5 * span;
    const double rbar = (2.0 / 3.0) * (r1 * r1 * r1 - r0 * r0 * r0) / (r1 * r1 - r0 * r0) *
                        (std::sin(half) / half);
    p.barycenter = polar(center, rbar, t0 + half);
    if (span > std::numbers::pi) {
        p.diameter = 2.0 * r1;
    } else {
        const double chord = 2.0 * r1 * std::sin(half);
        const double cross = std::sqrt(r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * std::cos(span));
        p.diameter = std::max({chord, cross, r1 - r0});
    }
    return p;
}

Patch make_ifs_patch(const IfsAttractor& attractor, const Affine& map, double weight) {
    Patch p;
    p.shape = PatchShape::ifs;
    p.map = map;
    p.attractor = &attractor;
    p.barycenter = map(attractor.barycenter);
    p.diameter = map.scale * attractor.diameter;
    p.weight = weight;
    return p;
}

namespace {

Eigen::Matrix3d triangle_covariance(const Point& a, const Point& b, const Point& c) {
    const Point g = (a + b + c) / 3.0;
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (const Point* v : {&a, &b, &c}) m += (*v - g) * (*v - g).transpose();
    return m / 12.0;
}

}  // namespace

Eigen::Matrix3d covariance(const Patch& p) {
    switch (p.shape) {
        case PatchShape::segment: {
            const Point d = p.v[1] - p.v[0];
            return d * d.transpose() / 12.0;
        }
        case PatchShape::triangle:
            return triangle_covariance(p.v[0], p.v[1], p.v[2]);
        case PatchShape::quad: {
            // Two triangles combined about the common barycenter.
            const auto& v = p.v;
            const double w1 = triangle_area(v[0], v[1], v[2]), w2 = triangle_area(v[0], v[2], v[3]);
            const Point g1 = (v[0] + v[1] + v[2]) / 3.0, g2 = (v[0] + v[2] + v[3]) / 3.0;
            const Point g = (w1 * g1 + w2 * g2) / (w1 + w2);
            return (w1 * (triangle_covariance(v[0], v[1], v[2]) + (g1 - g) * (g1 - g).transpose()) +
                    w2 * (triangle_covariance(v[0], v[2], v[3]) + (g2 - g) * (g2 - g).transpose())) /
                   (w1 + w2);
        }
        case PatchShape::sector: {
            // Polar moments about the centre, then shifted to the barycenter.
            const auto [r0, r1, t0, t1] = p.sector;
            const double area = 0.5 * (r1 * r1 - r0 * r0) * (t1 - t0);
            const double r4 = 0.25 * (std::pow(r1, 4) - std::pow(r0, 4));
            const double cc = 0.5 * (t1 - t0) + 0.25 * (std::sin(2.0 * t1) - std::sin(2.0 * t0));
            const double ss = 0.5 * (t1 - t0) - 0.25 * (std::sin(2.0 * t1) - std::sin(2.0 * t0));
            const double cs = 0.25 * (std::cos(2.0 * t0) - std::cos(2.0 * t1));
            Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
            m(0, 0) = r4 * cc / area;
            m(1, 1) = r4 * ss / area;
            m(0, 1) = m(1, 0) = r4 * cs / area;
            const Point g = p.barycenter - p.v[0];
            return m - g * g.transpose();
        }
        case PatchShape::ifs:
            return p.map.linear * p.attractor->covariance * p.map.linear.transpose();
    }
    return Eigen::Matrix3d::Zero();
}

void subdivide(const Patch& p, Children& out) {
    out.count = 0;
    auto push = [&out](Patch child) { out.items[out.count++] = std::move(child); };
    switch (p.shape) {
        case PatchShape::segment: {
            const Point m = 0.5 * (p.v[0] + p.v[1]);
            push(make_segment(p.v[0], m, 0.5 * p.weight));
            push(make_segment(m, p.v[1], 0.5 * p.weight));
            return;
        }
        case PatchShape::triangle: {
            const Point& a = p.v[0];
            const Point& b = p.v[1];
            const Point& c = p.v[2];
            const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
            // Flat children: area is conserved exactly, each carries 1/4.
            for (auto t : {make_triangle(a, ab, ca), make_triangle(ab, b, bc),
                           make_triangle(ca, bc, c), make_triangle(ab, bc, ca)}) {
                t.weight = 0.25 * p.weight;
                push(t);
            }
            return;
        }
        case PatchShape::quad: {
            const auto& v = p.v;
            const Point m01 = 0.5 * (v[0] + v[1]), m12 = 0.5 * (v[1] + v[2]);
            const Point m23 = 0.5 * (v[2] + v[3]), m30 = 0.5 * (v[3] + v[0]);
            const Point mc = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            Patch q[4] = {make_quad(v[0], m01, mc, m30), make_quad(m01, v[1], m12, mc),
                          make_quad(mc, m12, v[2], m23), make_quad(m30, mc, m23, v[3])};
            double sum = 0.0;
            for (const auto& c : q) sum += c.weight;
            for (auto& c : q) {
                c.weight *= p.weight / sum;
                push(c);
            }
            return;
        }
        case PatchShape::sector: {
            const auto [r0, r1, t0, t1] = p.sector;
            const double rm = 0.5 * (r0 + r1), tm = 0.5 * (t0 + t1);
            push(make_sector(p.v[0], r0, rm, t0, tm));
            push(make_sector(p.v[0], r0, rm, tm, t1));
            push(make_sector(p.v[0], rm, r1, t0, tm));
            push(make_sector(p.v[0], rm, r1, tm, t1));
            return;
        }
        case PatchShape::ifs: {
            const IfsAttractor& a = *p.attractor;
            for (std::size_t j = 0; j < a.maps.size(); ++j)
                push(make_ifs_patch(a, p.map.then(a.maps[j]), p.weight * a.mass[j]));
            return;
        }
    }
}

}  // namespace kbie
