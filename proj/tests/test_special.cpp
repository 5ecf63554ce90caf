#include "kbie/error.hpp"
#include "kbie/special.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace kbie;
using namespace kbie::special;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Ascending series for J_m, summed in long double.
double series_j(int m, double x) {
    long double term = 1.0L, half = x / 2.0L;
    for (int i = 1; i <= m; ++i) term *= half / i;
    long double sum = term;
    for (int j = 1; j < 200; ++j) {
        term *= -half * half / (static_cast<long double>(j) * (j + m));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return static_cast<double>(sum);
}

// Y_0 from the series with logarithm.
double series_y0(double x) {
    const long double q = x * static_cast<long double>(x) / 4.0L;
    long double term = 1.0L, harmonic = 0.0L, sum = 0.0L;
    for (int j = 1; j < 200; ++j) {
        term *= -q / (static_cast<long double>(j) * j);
        harmonic += 1.0L / j;
        sum -= term * harmonic;
        if (std::fabs(term * harmonic) < 1e-22L) break;
    }
    return static_cast<double>((2.0L / pi) * ((std::log(x / 2.0L) + euler_gamma) * series_j(0, x) + sum));
}

// K_0(x) = int_0^inf exp(-x cosh t) dt by the trapezoidal rule, which
// converges geometrically for this analytic, doubly decaying integrand.
double integral_k0(double x) {
    const double h = 1e-3;
    double sum = 0.5 * std::exp(-x);
    for (int i = 1; i < 20000; ++i) {
        const double v = std::exp(-x * std::cosh(i * h));
        sum += v;
        if (v < 1e-300) break;
    }
    return h * sum;
}

}  // namespace

TEST_CASE("J_m and Y_0 match ascending-series oracles") {
    CHECK(cylinder_bessel(BesselKind::J, 0, 0.0) == 1.0);
    CHECK_THAT(cylinder_bessel(BesselKind::J, 0, 1e-12), WithinAbs(1.0, 1e-15));
    CHECK_THAT(cylinder_bessel(BesselKind::J, 0, 1.0), WithinAbs(0.7651976866, 1e-10));
    CHECK_THAT(cylinder_bessel(BesselKind::Y, 0, 1.0), WithinAbs(0.0882569642, 1e-10));
    for (double x : {0.1, 0.5, 1.0, 3.0, 7.0, 10.0}) {
        for (int m = 0; m <= 6; ++m) {
            const double ref = series_j(m, x);
            CHECK_THAT(cylinder_bessel(BesselKind::J, m, x), WithinAbs(ref, 1e-12 * std::max(1e-3, std::abs(ref))));
        }
        const double y0 = series_y0(x);
        CHECK_THAT(cylinder_bessel(BesselKind::Y, 0, x), WithinAbs(y0, 1e-12 * std::max(1e-2, std::abs(y0))));
    }
}

TEST_CASE("cylinder Wronskian J_{m+1} Y_m - J_m Y_{m+1} = 2/(pi x)") {
    for (double x : {0.3, 1.0, 5.0, 40.0, 1000.0}) {
        for (int m : {0, 1, 4, 20}) {
            const double w = cylinder_bessel(BesselKind::J, m + 1, x) * cylinder_bessel(BesselKind::Y, m, x) -
                             cylinder_bessel(BesselKind::J, m, x) * cylinder_bessel(BesselKind::Y, m + 1, x);
            CHECK_THAT(w, WithinRel(2.0 / (pi * x), 1e-10));
        }
    }
}

TEST_CASE("cylinder_bessel rejects bad arguments") {
    CHECK_THROWS_AS(cylinder_bessel(BesselKind::Y, 0, 0.0), DomainError);
    CHECK_THROWS_AS(cylinder_bessel(BesselKind::J, 0, std::nan("")), DomainError);
    CHECK_THROWS_AS(cylinder_bessel(BesselKind::J, 0, INFINITY), DomainError);
    CHECK_THROWS_AS(cylinder_bessel(BesselKind::J, -1, 1.0), DomainError);
}

TEST_CASE("K_0 matches its integral representation") {
    CHECK_THAT(modified_bessel_k0(1.0), WithinAbs(0.4210244382, 1e-10));
    for (double x : {0.05, 0.1, 1.0, 2.5, 10.0, 30.0})
        CHECK_THAT(modified_bessel_k0(x), WithinRel(integral_k0(x), 1e-12));
    const double ratio = modified_bessel_k0(20.0) / modified_bessel_k0(19.0);
    CHECK_THAT(ratio, WithinRel(std::exp(-1.0) * std::sqrt(19.0 / 20.0), 0.01));
    double prev = INFINITY;
    for (double x : {0.1, 1.0, 10.0}) {
        const double v = modified_bessel_k0(x);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(modified_bessel_k0(0.0), DomainError);
    CHECK_THROWS_AS(modified_bessel_k0(-1.0), DomainError);
}

TEST_CASE("Hankel functions") {
    const Complex h = hankel1(0, 1.0);
    CHECK_THAT(h.real(), WithinAbs(0.7651976866, 1e-10));
    CHECK_THAT(h.imag(), WithinAbs(0.0882569642, 1e-10));

    double prev = INFINITY;
    for (double x : {1.0, 2.0, 4.0, 8.0}) {
        CHECK(std::abs(hankel1(0, x)) < prev);
        prev = std::abs(hankel1(0, x));
    }

    const Complex lhs = hankel1(2, 5.0) + hankel1(4, 5.0);
    const Complex rhs = (6.0 / 5.0) * hankel1(3, 5.0);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));

    // H_m' = (H_{m-1} - H_{m+1}) / 2, H_0' = -H_1.
    for (int m : {0, 1, 5}) {
        const double x = 2.7;
        const Complex ref = m == 0 ? -hankel1(1, x) : 0.5 * (hankel1(m - 1, x) - hankel1(m + 1, x));
        CHECK(std::abs(hankel1_derivative(m, x) - ref) <= 1e-12 * std::abs(ref));
        CHECK_THAT(cylinder_bessel_j_derivative(m, x), WithinAbs(ref.real(), 1e-12));
    }
    CHECK_THROWS_AS(hankel1(0, 0.0), DomainError);
}

TEST_CASE("spherical Hankel functions") {
    const Complex h0 = spherical_hankel1(0, 1.0);
    CHECK_THAT(h0.real(), WithinAbs(0.8414709848, 1e-10));
    CHECK_THAT(h0.imag(), WithinAbs(-0.5403023059, 1e-10));

    // Upward recurrence f_{l+1} = (2l+1)/x f_l - f_{l-1} from the l = 0, 1 closed forms.
    for (double x : {1.0, 2.0, 6.0}) {
        const Complex e = std::exp(Complex(0.0, x));
        Complex f0 = -Complex(0.0, 1.0) * e / x;
        Complex f1 = -e * (x + Complex(0.0, 1.0)) / (x * x);
        CHECK(std::abs(spherical_hankel1(1, x) - f1) <= 1e-12 * std::abs(f1));
        for (int l = 1; l < 6; ++l) {
            const Complex f2 = (2.0 * l + 1.0) / x * f1 - f0;
            f0 = f1;
            f1 = f2;
            CHECK(std::abs(spherical_hankel1(l + 1, x) - f1) <= 1e-12 * std::abs(f1));
        }
        CHECK_THAT(spherical_bessel_j(0, x), WithinRel(std::sin(x) / x, 1e-14));
    }

    for (int l : {0, 1, 3}) {
        const double x = 2.0;
        const Complex w = spherical_bessel_j(l, x) * spherical_hankel1_derivative(l, x) -
                          spherical_bessel_j_derivative(l, x) * spherical_hankel1(l, x);
        CHECK(std::abs(w - Complex(0.0, 1.0 / (x * x))) <= 1e-10);
    }
    CHECK_THROWS_AS(spherical_hankel1(0, 0.0), DomainError);
    CHECK_THROWS_AS(spherical_hankel1(1, -1.0), DomainError);
}

TEST_CASE("fundamental solution values") {
    const Complex a = fundamental_solution(3, Wavenumber(2.0), 0.5);
    CHECK_THAT(a.real(), WithinAbs(std::cos(1.0) / (2.0 * pi), 1e-15));
    CHECK_THAT(a.imag(), WithinAbs(std::sin(1.0) / (2.0 * pi), 1e-15));
    CHECK_THAT(a.real(), WithinAbs(0.0860, 5e-5));
    CHECK_THAT(a.imag(), WithinAbs(0.1339, 5e-5));

    const Complex b = fundamental_solution(2, Wavenumber(1.0), 1.0);
    CHECK_THAT(b.real(), WithinAbs(-0.0220642411, 1e-10));
    CHECK_THAT(b.imag(), WithinAbs(0.1912994217, 1e-10));

    const Complex c = fundamental_solution(3, Wavenumber::damped(2.0), 0.5);
    CHECK_THAT(c.real(), WithinAbs(std::exp(-1.0) / (2.0 * pi), 1e-15));
    CHECK(c.imag() == 0.0);
    CHECK_THAT(c.real(), WithinAbs(0.058550, 1e-6));

    const Complex d = fundamental_solution(2, Wavenumber::damped(3.0), 0.7);
    CHECK_THAT(d.real(), WithinRel(integral_k0(2.1) / (2.0 * pi), 1e-12));

    CHECK_THROWS_AS(fundamental_solution(3, Wavenumber(1.0), 0.0), SingularityError);
    CHECK_THROWS_AS(fundamental_solution(2, Wavenumber(1.0), -1.0), SingularityError);
    CHECK_THROWS_AS(fundamental_solution(4, Wavenumber(1.0), 1.0), DomainError);
}

TEST_CASE("wavenumber validation") {
    CHECK_THROWS_AS(Wavenumber(0.0), DomainError);
    CHECK_THROWS_AS(Wavenumber(-1.0), DomainError);
    CHECK_THROWS_AS(Wavenumber(INFINITY), DomainError);
    CHECK(Wavenumber::damped(2.0).damped());
    CHECK_FALSE(Wavenumber(2.0).damped());
    CHECK(std::string(to_string(KernelMode::damped)) == "damped");
}

TEST_CASE("kernel properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);

    SECTION("reciprocity over random pairs") {
        for (int i = 0; i < 100; ++i) {
            const double x[3] = {u(rng), u(rng), u(rng)};
            const double y[3] = {u(rng), u(rng), u(rng)};
            const double rxy = std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
            const double ryx = std::hypot(y[0] - x[0], y[1] - x[1], y[2] - x[2]);
            for (int n : {2, 3})
                CHECK(fundamental_solution(n, Wavenumber(1.7), rxy) == fundamental_solution(n, Wavenumber(1.7), ryx));
        }
    }

    SECTION("damped values are real and positive") {
        for (int n : {2, 3})
            for (double k : {0.1, 1.0, 10.0})
                for (double r : {1e-6, 0.01, 1.0, 5.0}) {
                    const Complex v = fundamental_solution(n, Wavenumber::damped(k), r);
                    CHECK(v.imag() == 0.0);
                    CHECK(v.real() > 0.0);
                }
    }

    SECTION("logarithmic singularity is isolated in 2D") {
        const double limit = -(std::log(0.5) + euler_gamma) / (2.0 * pi);
        for (double r : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const double rest = fundamental_solution(2, Wavenumber(1.0), r).real() + std::log(r) / (2.0 * pi);
            CHECK(std::abs(rest - limit) < 1e-3);
        }
    }

    SECTION("imaginary parts at coincidence") {
        CHECK_THAT(fundamental_solution(2, Wavenumber(1.0), 1e-9).imag(), WithinAbs(0.25, 1e-12));
        CHECK_THAT(fundamental_solution(3, Wavenumber(2.0), 1e-9).imag(), WithinAbs(2.0 / (4.0 * pi), 1e-12));
    }
}
