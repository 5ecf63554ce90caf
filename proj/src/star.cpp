#include "kbie/error.hpp"
#include "kbie/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace kbie {

namespace {

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool ccw_polygon(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross2(v[i], v[(i + 1) % v.size()]);
    return s > 0.0;
}

/// Keep the part of the convex polygon `region` left of the directed line a->b.
std::vector<Point> clip_left(const std::vector<Point>& region, const Point& a, const Point& b) {
    std::vector<Point> out;
    const Point dir = b - a;
    auto side = [&](const Point& p) { return cross2(dir, p - a); };
    for (std::size_t i = 0; i < region.size(); ++i) {
        const Point& p = region[i];
        const Point& q = region[(i + 1) % region.size()];
        const double sp = side(p), sq = side(q);
        if (sp >= 0.0) out.push_back(p);
        if ((sp >= 0.0) != (sq >= 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (a + t * ab - p).norm();
}

}  // namespace

std::optional<Point> star_center(const ObstacleSpec& spec) {
    if (const auto* poly = std::get_if<PolygonBoundary>(&spec.variant)) {
        validate(spec);
        std::vector<Point> v = poly->vertices;
        if (!ccw_polygon(v)) std::reverse(v.begin(), v.end());
        Point lo = v.front(), hi = v.front();
        for (const auto& p : v) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        std::vector<Point> kernel = {Point(lo.x(), lo.y(), 0), Point(hi.x(), lo.y(), 0), Point(hi.x(), hi.y(), 0),
                                     Point(lo.x(), hi.y(), 0)};
        for (std::size_t i = 0; i < v.size() && !kernel.empty(); ++i)
            kernel = clip_left(kernel, v[i], v[(i + 1) % v.size()]);
        if (kernel.empty()) return std::nullopt;
        Point c = Point::Zero();
        for (const auto& p : kernel) c += p;
        return c / static_cast<double>(kernel.size());
    }
    if (const auto* c = std::get_if<CircleBoundary>(&spec.variant)) return c->center;
    if (const auto* s = std::get_if<SphereBoundary>(&spec.variant)) return s->center;
    if (const auto* d = std::get_if<DiscVolume>(&spec.variant)) return d->center;
    if (const auto* q = std::get_if<SquareVolume>(&spec.variant))
        return Point(q->corner + Point(0.5 * q->side, 0.5 * q->side, 0.0));
    throw UnsupportedQuery("star_center: not defined for " + spec.kind_name());
}

bool contains(const ObstacleSpec& spec, const Point& x, double tol) {
    if (const auto* poly = std::get_if<PolygonBoundary>(&spec.variant)) {
        const auto& v = poly->vertices;
        double scale = 0.0;
        for (const auto& p : v) scale = std::max(scale, p.norm());
        for (std::size_t i = 0; i < v.size(); ++i)
            if (segment_distance(x, v[i], v[(i + 1) % v.size()]) <= tol * std::max(1.0, scale)) return true;
        bool inside = false;
        for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
            if ((v[i].y() > x.y()) != (v[j].y() > x.y())) {
                const double xc = v[j].x() + (x.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
                if (x.x() < xc) inside = !inside;
            }
        }
        return inside;
    }
    auto ball = [&](const Point& c, double r) { return (x - c).norm() <= r * (1.0 + tol); };
    if (const auto* c = std::get_if<CircleBoundary>(&spec.variant)) return ball(c->center, c->radius);
    if (const auto* s = std::get_if<SphereBoundary>(&spec.variant)) return ball(s->center, s->radius);
    if (const auto* d = std::get_if<DiscVolume>(&spec.variant)) return ball(d->center, d->radius);
    if (const auto* q = std::get_if<SquareVolume>(&spec.variant)) {
        const Point rel = x - q->corner;
        const double t = tol * std::max(1.0, q->side);
        return rel.x() >= -t && rel.y() >= -t && rel.x() <= q->side + t && rel.y() <= q->side + t;
    }
    throw UnsupportedQuery("contains: not defined for " + spec.kind_name());
}

}  // namespace kbie
