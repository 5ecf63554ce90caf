#pragma once

#include <complex>

namespace kbie {

using Complex = std::complex<double>;

enum class KernelMode { oscillatory, damped };

/// Real wavenumber k > 0. In damped mode every kernel is evaluated at the
/// purely imaginary wavenumber i*k (exponentially decaying, real, positive).
class Wavenumber {
public:
    Wavenumber(double value, KernelMode mode = KernelMode::oscillatory);

    static Wavenumber oscillatory(double k) { return {k, KernelMode::oscillatory}; }
    static Wavenumber damped(double k) { return {k, KernelMode::damped}; }

    double value() const noexcept { return value_; }
    KernelMode mode() const noexcept { return mode_; }
    bool damped() const noexcept { return mode_ == KernelMode::damped; }

    friend bool operator==(const Wavenumber&, const Wavenumber&) = default;

private:
    double value_;
    KernelMode mode_;
};

const char* to_string(KernelMode mode);

namespace special {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;

enum class BesselKind { J, Y };

/// J_m(x) or Y_m(x) for integer m >= 0. J accepts x = 0.
double cylinder_bessel(BesselKind kind, int order, double x);

/// K_0(x), x > 0.
double modified_bessel_k0(double x);

/// H_m^(1)(x) = J_m(x) + i Y_m(x).
Complex hankel1(int order, double x);

/// d/dx H_m^(1)(x).
Complex hankel1_derivative(int order, double x);

/// d/dx J_m(x).
double cylinder_bessel_j_derivative(int order, double x);

/// Spherical Bessel j_l(x), x >= 0.
double spherical_bessel_j(int l, double x);

/// h_l^(1)(x) = j_l(x) + i y_l(x); closed forms for l <= 2.
Complex spherical_hankel1(int l, double x);

/// d/dx of spherical_bessel_j and spherical_hankel1.
double spherical_bessel_j_derivative(int l, double x);
Complex spherical_hankel1_derivative(int l, double x);

/// Outgoing fundamental solution of the Helmholtz equation in dimension n.
///   oscillatory: n=3 e^{ikr}/(4 pi r),  n=2 (i/4) H_0^(1)(kr)
///   damped:      n=3 e^{-kr}/(4 pi r),  n=2 K_0(kr)/(2 pi)
/// Throws SingularityError for r <= 0.
Complex fundamental_solution(int n, const Wavenumber& k, double r);

}  // namespace special
}  // namespace kbie
