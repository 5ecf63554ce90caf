#include "kbie/analysis.hpp"
#include "kbie/error.hpp"
#include "kbie/special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

namespace kbie {

namespace {

void check_bump(const BumpSpec& bump) {
    if (!(bump.radius > 0.0) || !std::isfinite(bump.radius)) throw DomainError("bump: radius must be positive");
    if (!bump.center.allFinite() || bump.center.z() != 0.0) throw DomainError("bump: center must be a finite planar point");
}

/// Support ball {|x - c| <= rho0} inside the closed region bounded by Gamma.
bool support_inside(const BumpSpec& bump, const ObstacleSpec& obstacle) {
    const double slack = 1e-12;
    auto in_ball = [&](const Point& c, double r) { return (bump.center - c).norm() + bump.radius <= r * (1.0 + slack); };
    if (const auto* d = std::get_if<DiscVolume>(&obstacle.variant)) return in_ball(d->center, d->radius);
    if (const auto* c = std::get_if<CircleBoundary>(&obstacle.variant)) return in_ball(c->center, c->radius);
    if (const auto* q = std::get_if<SquareVolume>(&obstacle.variant)) {
        const Point lo = q->corner, hi = q->corner + Point(q->side, q->side, 0.0);
        const double t = slack * q->side;
        return bump.center.x() - bump.radius >= lo.x() - t && bump.center.x() + bump.radius <= hi.x() + t &&
               bump.center.y() - bump.radius >= lo.y() - t && bump.center.y() + bump.radius <= hi.y() + t;
    }
    if (std::holds_alternative<PolygonBoundary>(obstacle.variant)) {
        // Sample the support circle densely; adequate for the polygons accepted here.
        const int samples = 720;
        if (!contains(obstacle, bump.center, slack)) return false;
        for (int i = 0; i < samples; ++i) {
            const double t = 2.0 * special::pi * i / samples;
            const Point p = bump.center + bump.radius * Point(std::cos(t), std::sin(t), 0.0);
            if (!contains(obstacle, p, slack)) return false;
        }
        return true;
    }
    throw DomainError("quasimode: obstacle '" + obstacle.kind_name() + "' has no planar interior");
}

}  // namespace

BumpNorms bump_norms(const BumpSpec& bump) {
    check_bump(bump);
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const double rho = bump.radius;
    // Profile f(s) = (1 - s^2)^3 with s = |x - c| / rho; integrals over the unit disc in s.
    const double i0 = Rule::integrate([](double s) { return std::pow(1.0 - s * s, 6) * s; }, 0.0, 1.0);
    const double i1 = Rule::integrate(
        [](double s) {
            const double fp = -6.0 * s * std::pow(1.0 - s * s, 2);
            return fp * fp * s;
        },
        0.0, 1.0);
    const double i2 = Rule::integrate(
        [](double s) {
            const double lap = 12.0 * (1.0 - s * s) * (3.0 * s * s - 1.0);
            return lap * lap * s;
        },
        0.0, 1.0);
    const double two_pi = 2.0 * special::pi;
    BumpNorms n;
    n.l2 = std::sqrt(two_pi * i0) * rho;
    // Radial symmetry: the x1-derivative carries half of |grad sigma|^2.
    n.dx1 = std::sqrt(0.5 * two_pi * i1);
    n.laplace = std::sqrt(two_pi * i2) / rho;
    return n;
}

double quasimode_lower_bound(const BumpSpec& bump, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("quasimode: k must be positive");
    const BumpNorms n = bump_norms(bump);
    return k * n.l2 / (n.dx1 + n.laplace / k);
}

double quasimode_lower_bound(const BumpSpec& bump, double k, const ObstacleSpec& obstacle) {
    check_bump(bump);
    if (obstacle.ambient_dim != 2) throw DomainError("quasimode: only planar obstacles are supported");
    if (!support_inside(bump, obstacle)) throw DomainError("quasimode: bump support is not inside the obstacle");
    return quasimode_lower_bound(bump, k);
}

}  // namespace kbie
