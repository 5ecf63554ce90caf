#include "kbie/analysis.hpp"
#include "kbie/error.hpp"
#include "kbie/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

namespace kbie {

namespace {

struct Level {
    double value;
    int multiplicity;
};

/// Merge equal values (relative 1e-12) and keep the smallest `count` with multiplicity.
SpectrumReport finalize(const CavityShape& shape, std::vector<Level> levels, std::size_t count) {
    std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.value < b.value; });
    SpectrumReport r;
    r.cavity = shape;
    std::size_t total = 0;
    for (const auto& l : levels) {
        if (!r.eigenvalues.empty() && std::abs(l.value - r.eigenvalues.back()) <= 1e-12 * l.value) {
            r.multiplicity.back() += l.multiplicity;
            total += static_cast<std::size_t>(l.multiplicity);
            continue;
        }
        if (total >= count) break;
        r.eigenvalues.push_back(l.value);
        r.multiplicity.push_back(l.multiplicity);
        total += static_cast<std::size_t>(l.multiplicity);
    }
    for (double v : r.eigenvalues) r.sigma.push_back(std::sqrt(v));
    return r;
}

std::size_t total_count(const std::vector<Level>& levels, double cap) {
    std::size_t n = 0;
    for (const auto& l : levels)
        if (l.value <= cap) n += static_cast<std::size_t>(l.multiplicity);
    return n;
}

std::vector<Level> rectangle_levels(double a, double b, double cap) {
    std::vector<Level> out;
    const double pi2 = special::pi * special::pi;
    for (int p = 1; pi2 * p * p / (a * a) <= cap; ++p)
        for (int q = 1;; ++q) {
            const double v = pi2 * (static_cast<double>(p) * p / (a * a) + static_cast<double>(q) * q / (b * b));
            if (v > cap) break;
            out.push_back({v, 1});
        }
    return out;
}

std::vector<Level> disc_levels(double radius, double cap) {
    std::vector<Level> out;
    const double zmax = std::sqrt(cap) * radius;
    for (int m = 0;; ++m) {
        if (bessel_j_zero(m, 1) > zmax) break;
        for (int s = 1;; ++s) {
            const double z = bessel_j_zero(m, s);
            if (z > zmax) break;
            out.push_back({z * z / (radius * radius), m == 0 ? 1 : 2});
        }
    }
    return out;
}

}  // namespace

std::string CavityShape::describe() const {
    char buf[96];
    switch (kind) {
        case Kind::rectangle:
            std::snprintf(buf, sizeof buf, "rectangle(%.12g, %.12g)", rectangle.a, rectangle.b);
            return buf;
        case Kind::disc:
            std::snprintf(buf, sizeof buf, "disc(%.12g)", disc.radius);
            return buf;
        case Kind::none:
            break;
    }
    return "empty";
}

double bessel_j_zero(int m, int n) {
    if (m < 0 || n < 1) throw DomainError("bessel_j_zero: need m >= 0 and n >= 1");
    auto j = [m](double x) { return special::cylinder_bessel(special::BesselKind::J, m, x); };
    // All positive zeros of J_m exceed m; consecutive zeros are more than pi apart.
    const double step = 0.25;
    double x = std::max(static_cast<double>(m), step);
    double fx = j(x);
    int found = 0;
    while (true) {
        const double y = x + step;
        const double fy = j(y);
        if (fx == 0.0 || (fx < 0.0) != (fy < 0.0)) {
            if (++found == n) {
                if (fx == 0.0) return x;
                double lo = x, hi = y, flo = fx;
                for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = j(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        x = y;
        fx = fy;
    }
}

SpectrumReport cavity_eigenvalues(const CavityShape& shape, std::size_t count) {
    if (count < 1) throw DomainError("cavity_eigenvalues: count must be at least 1");
    if (shape.kind == CavityShape::Kind::none) return finalize(shape, {}, count);

    double cap;
    std::vector<Level> (*levels)(double, double, double) = nullptr;
    double p1 = 0.0, p2 = 0.0;
    if (shape.kind == CavityShape::Kind::rectangle) {
        p1 = shape.rectangle.a;
        p2 = shape.rectangle.b;
        if (!(p1 > 0.0 && p2 > 0.0) || !std::isfinite(p1) || !std::isfinite(p2))
            throw DomainError("cavity_eigenvalues: rectangle sides must be positive");
        levels = rectangle_levels;
        cap = 2.0 * special::pi * special::pi * (1.0 / (p1 * p1) + 1.0 / (p2 * p2));
    } else {
        p1 = shape.disc.radius;
        if (!(p1 > 0.0) || !std::isfinite(p1)) throw DomainError("cavity_eigenvalues: disc radius must be positive");
        levels = [](double r, double, double c) { return disc_levels(r, c); };
        cap = 4.0 * 5.7831859629467845 / (p1 * p1);
    }
    if (count > 1000000) throw ResourceError("cavity_eigenvalues: count too large");
    std::vector<Level> found = levels(p1, p2, cap);
    while (total_count(found, cap) < count) {
        cap *= 2.0;
        found = levels(p1, p2, cap);
    }
    return finalize(shape, std::move(found), count);
}

double cavity_resolvent_factor(double k, const SpectrumReport& spectrum) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("cavity_resolvent_factor: k must be positive");
    if (spectrum.eigenvalues.empty()) return 0.0;
    const double k2 = k * k;
    double dist = std::numeric_limits<double>::infinity();
    for (double v : spectrum.eigenvalues) dist = std::min(dist, std::abs(k2 - v));
    return dist == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / dist;
}

}  // namespace kbie
