#include "kbie/special.hpp"

#include "kbie/error.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include <cmath>
#include <string>

namespace kbie {

namespace {

namespace bm = boost::math;
using Policy = bm::policies::policy<bm::policies::promote_double<false>,
                                    bm::policies::underflow_error<bm::policies::ignore_error>,
                                    bm::policies::denorm_error<bm::policies::ignore_error>,
                                    bm::policies::overflow_error<bm::policies::ignore_error>>;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument is not finite");
}

void require_order(int order, const char* what) {
    if (order < 0) throw DomainError(std::string(what) + ": negative order");
}

}  // namespace

Wavenumber::Wavenumber(double value, KernelMode mode) : value_(value), mode_(mode) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw DomainError("wavenumber must be finite and positive");
}

const char* to_string(KernelMode mode) {
    return mode == KernelMode::damped ? "damped" : "oscillatory";
}

namespace special {

double cylinder_bessel(BesselKind kind, int order, double x) {
    require_finite(x, "cylinder_bessel");
    require_order(order, "cylinder_bessel");
    if (x < 0.0) throw DomainError("cylinder_bessel: negative argument");
    if (kind == BesselKind::J) {
        if (x == 0.0) return order == 0 ? 1.0 : 0.0;
        return bm::cyl_bessel_j(order, x, Policy());
    }
    if (x == 0.0) throw DomainError("cylinder_bessel: Y_m diverges at x = 0");
    return bm::cyl_neumann(order, x, Policy());
}

double cylinder_bessel_j_derivative(int order, double x) {
    require_finite(x, "cylinder_bessel_j_derivative");
    require_order(order, "cylinder_bessel_j_derivative");
    if (x < 0.0) throw DomainError("cylinder_bessel_j_derivative: negative argument");
    return bm::cyl_bessel_j_prime(order, x, Policy());
}

double modified_bessel_k0(double x) {
    require_finite(x, "modified_bessel_k0");
    if (!(x > 0.0)) throw DomainError("modified_bessel_k0: argument must be positive");
    return bm::cyl_bessel_k(0, x, Policy());
}

Complex hankel1(int order, double x) {
    if (!(x > 0.0)) throw DomainError("hankel1: argument must be positive");
    return {cylinder_bessel(BesselKind::J, order, x), cylinder_bessel(BesselKind::Y, order, x)};
}

Complex hankel1_derivative(int order, double x) {
    require_finite(x, "hankel1_derivative");
    require_order(order, "hankel1_derivative");
    if (!(x > 0.0)) throw DomainError("hankel1_derivative: argument must be positive");
    return {bm::cyl_bessel_j_prime(order, x, Policy()), bm::cyl_neumann_prime(order, x, Policy())};
}

double spherical_bessel_j(int l, double x) {
    require_finite(x, "spherical_bessel_j");
    require_order(l, "spherical_bessel_j");
    if (x < 0.0) throw DomainError("spherical_bessel_j: negative argument");
    if (x == 0.0) return l == 0 ? 1.0 : 0.0;
    return bm::sph_bessel(static_cast<unsigned>(l), x, Policy());
}

Complex spherical_hankel1(int l, double x) {
    require_finite(x, "spherical_hankel1");
    require_order(l, "spherical_hankel1");
    if (!(x > 0.0)) throw DomainError("spherical_hankel1: argument must be positive");
    const Complex i(0.0, 1.0);
    const Complex e = std::exp(i * x);
    switch (l) {
        case 0: return -i * e / x;
        case 1: return -e * (x + i) / (x * x);
        case 2: return i * e * (x * x + 3.0 * i * x - 3.0) / (x * x * x);
        default: break;
    }
    return {bm::sph_bessel(static_cast<unsigned>(l), x, Policy()),
            bm::sph_neumann(static_cast<unsigned>(l), x, Policy())};
}

double spherical_bessel_j_derivative(int l, double x) {
    require_finite(x, "spherical_bessel_j_derivative");
    require_order(l, "spherical_bessel_j_derivative");
    if (x < 0.0) throw DomainError("spherical_bessel_j_derivative: negative argument");
    return bm::sph_bessel_prime(static_cast<unsigned>(l), x, Policy());
}

Complex spherical_hankel1_derivative(int l, double x) {
    if (!(x > 0.0)) throw DomainError("spherical_hankel1_derivative: argument must be positive");
    // h_l' = h_{l-1} - (l+1)/x h_l, and h_0' = -h_1
    if (l == 0) return -spherical_hankel1(1, x);
    return spherical_hankel1(l - 1, x) - (l + 1.0) / x * spherical_hankel1(l, x);
}

Complex fundamental_solution(int n, const Wavenumber& k, double r) {
    if (!(r > 0.0)) throw SingularityError("fundamental_solution: r must be positive");
    if (n != 2 && n != 3) throw DomainError("fundamental_solution: dimension must be 2 or 3");
    const double kr = k.value() * r;
    if (n == 3) {
        if (k.damped()) return {std::exp(-kr) / (4.0 * pi * r), 0.0};
        return Complex(std::cos(kr), std::sin(kr)) / (4.0 * pi * r);
    }
    if (k.damped()) return {modified_bessel_k0(kr) / (2.0 * pi), 0.0};
    // (i/4)(J0 + iY0)
    const double j0 = bm::cyl_bessel_j(0, kr, Policy());
    const double y0 = bm::cyl_neumann(0, kr, Policy());
    return {-0.25 * y0, 0.25 * j0};
}

}  // namespace special
}  // namespace kbie
