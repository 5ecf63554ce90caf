#include "kbie/error.hpp"
#include "kbie/scatter.hpp"
#include "kbie/special.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>

namespace kbie {

namespace {

const Complex I(0.0, 1.0);

Complex ipow(int m) {
    switch (m % 4) {
        case 0: return 1.0;
        case 1: return I;
        case 2: return -1.0;
        default: return -I;
    }
}

int truncation(double k, double radius, int extra) {
    if (extra < 0) throw DomainError("mie: extra_terms must be nonnegative");
    return static_cast<int>(std::ceil(k * radius)) + 40 + extra;
}

/// Angle of x about the incidence direction, in the plane.
double polar_angle(const Point& x, const Point& d) {
    return std::atan2(d.x() * x.y() - d.y() * x.x(), d.x() * x.x() + d.y() * x.y());
}

}  // namespace

FieldSamples mie_reference(const MieShape& shape, const IncidentWave& wave, const std::vector<Point>& points,
                           int extra_terms) {
    wave.validate();
    if (!(shape.radius > 0.0)) throw DomainError("mie: radius must be positive");
    const double k = wave.k, R = shape.radius;
    const int order = truncation(k, R, extra_terms);
    const bool circle = shape.kind == MieShape::Kind::circle;
    if (circle && (wave.direction.z() != 0.0)) throw DomainError("mie: circle needs an in-plane direction");

    // Coefficients c_m = J_m(kR)/H_m(kR) (or j_l/h_l); zero once H overflows.
    std::vector<Complex> coef;
    for (int m = 0; m <= order; ++m) {
        const double j = circle ? special::cylinder_bessel(special::BesselKind::J, m, k * R)
                                : special::spherical_bessel_j(m, k * R);
        const Complex h = circle ? special::hankel1(m, k * R) : special::spherical_hankel1(m, k * R);
        coef.push_back(std::isfinite(std::abs(h)) ? j / h : Complex(0.0));
    }

    FieldSamples out;
    out.points = points;
    for (const Point& x : points) {
        const double r = circle ? std::hypot(x.x(), x.y()) : x.norm();
        if (circle && x.z() != 0.0) throw DomainError("mie: circle points must lie in the plane");
        if (!(r >= R * (1.0 - 1e-12))) throw DomainError("mie: point inside the obstacle");
        Complex u = 0.0;
        if (circle) {
            const double theta = polar_angle(x, wave.direction);
            for (int m = 0; m <= order; ++m) {
                if (coef[m] == 0.0) continue;
                const Complex term = ipow(m) * coef[m] * special::hankel1(m, k * r);
                u -= (m == 0 ? 1.0 : 2.0 * std::cos(m * theta)) * term;
            }
        } else {
            const double ct = std::clamp(wave.direction.dot(x) / r, -1.0, 1.0);
            for (int l = 0; l <= order; ++l) {
                if (coef[l] == 0.0) continue;
                u -= (2.0 * l + 1.0) * ipow(l) * coef[l] * special::spherical_hankel1(l, k * r) *
                     boost::math::legendre_p(l, ct);
            }
        }
        out.values.push_back(u);
        out.low_accuracy.push_back(false);
    }
    return out;
}

Complex mie_circle_density(double radius, const IncidentWave& wave, double theta) {
    wave.validate();
    if (!(radius > 0.0)) throw DomainError("mie: radius must be positive");
    const double kr = wave.k * radius;
    const double rel = theta - std::atan2(wave.direction.y(), wave.direction.x());
    const int order = truncation(wave.k, radius, 0);
    Complex s = 0.0;
    for (int m = 0; m <= order; ++m) {
        const Complex h = special::hankel1(m, kr);
        if (!std::isfinite(std::abs(h))) break;
        s += (m == 0 ? 1.0 : 2.0 * std::cos(m * rel)) * ipow(m) / h;
    }
    return 2.0 * I / (special::pi * radius) * s;
}

}  // namespace kbie
