#include "kbie/error.hpp"
#include "kbie/scatter.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace kbie;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = special::pi;
const Complex I(0.0, 1.0);

Mesh circle_mesh(std::size_t n) { return build_mesh({2, CircleBoundary{}}, n); }

Complex ipow(int m) {
    static const Complex p[4] = {1.0, I, -1.0, -I};
    return p[((m % 4) + 4) % 4];
}

Complex h1(int m, double x) { return {boost::math::cyl_bessel_j(m, x), boost::math::cyl_neumann(m, x)}; }

// Sound-soft circle, plane wave along +x, summed over -M..M.
Complex circle_oracle(double k, double radius, const Point& x, int terms) {
    const double r = x.norm(), t = std::atan2(x.y(), x.x());
    Complex u = 0.0;
    for (int m = 0; m <= terms; ++m) {
        const Complex c = ipow(m) * boost::math::cyl_bessel_j(m, k * radius) / h1(m, k * radius) * h1(m, k * r);
        u -= (m == 0 ? 1.0 : 2.0 * std::cos(m * t)) * c;
    }
    return u;
}

// -d_r u^t on r = R from the Wronskian J_m' H_m - J_m H_m' = -2i / (pi k R).
Complex circle_density_oracle(double k, double radius, double theta, int terms) {
    Complex s = 0.0;
    for (int m = 0; m <= terms; ++m) s += (m == 0 ? 1.0 : 2.0 * std::cos(m * theta)) * ipow(m) / h1(m, k * radius);
    return 2.0 * I / (pi * radius) * s;
}

Complex sphere_oracle(double k, double radius, const Point& x, int terms) {
    const double r = x.norm(), ct = x.z() / r;
    auto sh = [](int l, double z) { return Complex(boost::math::sph_bessel(l, z), boost::math::sph_neumann(l, z)); };
    Complex u = 0.0;
    for (int l = 0; l <= terms; ++l)
        u -= (2.0 * l + 1.0) * ipow(l) * boost::math::sph_bessel(l, k * radius) / sh(l, k * radius) * sh(l, k * r) *
             boost::math::legendre_p(l, ct);
    return u;
}

Mesh one_cell(int n, const Point& at, double weight) {
    Mesh m;
    m.ambient_dim = n;
    QuadratureCell c;
    c.id = "0";
    const double e = 1e-6;
    c.patch = n == 3 ? make_triangle(at, at + Point(e, 0, 0), at + Point(0, e, 0))
                     : make_segment(at - Point(e, 0, 0), at + Point(e, 0, 0), weight);
    c.patch.weight = weight;
    c.patch.barycenter = at;
    m.cells.push_back(c);
    m.total_measure = weight;
    return m;
}

DensityVector exact_circle_density(const Mesh& m, double k) {
    const IncidentWave wave{Point::UnitX(), k};
    DensityVector phi{Eigen::VectorXcd(static_cast<Eigen::Index>(m.size()))};
    for (std::size_t j = 0; j < m.size(); ++j) {
        const Point b = m.cells[j].barycenter();
        phi.coefficients[static_cast<Eigen::Index>(j)] = mie_circle_density(1.0, wave, std::atan2(b.y(), b.x()));
    }
    return phi;
}

DensityVector solve_circle(std::size_t n, double k) {
    const Mesh m = circle_mesh(n);
    const GalerkinMatrix a = assemble_operator(m, Wavenumber(k));
    return solve_density(a, assemble_rhs(m, {Point::UnitX(), k}));
}

}  // namespace

TEST_CASE("plane-wave right-hand side") {
    const Mesh origin = one_cell(2, Point::Zero(), 1.0);
    CHECK(assemble_rhs(origin, {Point(0.6, 0.8, 0.0), 3.0})[0] == Complex(-1.0, 0.0));

    const double k = 2.5;
    const Mesh quarter = one_cell(2, Point(pi / (2.0 * k), 0.0, 0.0), 0.3);
    const Complex g = assemble_rhs(quarter, {Point::UnitX(), k})[0];
    CHECK_THAT(g.real(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(g.imag(), WithinRel(-0.3, 1e-15));

    const Mesh m = circle_mesh(64);
    const Point d = Point(1.0, 2.0, 0.0).normalized();
    const Eigen::VectorXcd fwd = assemble_rhs(m, {d, 4.0});
    const Eigen::VectorXcd back = assemble_rhs(m, {Point(-d), 4.0});
    CHECK((fwd.conjugate() - back).norm() <= 1e-14 * fwd.norm());

    CHECK_THROWS_AS(assemble_rhs(m, {Point(1.0, 1.0, 0.0), 1.0}), DomainError);
    CHECK_THROWS_AS(assemble_rhs(m, {Point::UnitX(), 0.0}), DomainError);
}

TEST_CASE("direct and least-squares solves") {
    const Eigen::VectorXcd g = Eigen::VectorXcd::Random(4);
    CHECK(solve_density(Eigen::MatrixXcd::Identity(4, 4), g, SolveMethod::direct).coefficients == g);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const Eigen::VectorXcd phi = solve_density(d, Eigen::Vector2cd(2.0, 8.0), SolveMethod::direct).coefficients;
    CHECK(phi[0] == Complex(1.0));
    CHECK(phi[1] == Complex(2.0));

    std::mt19937 rng(4);
    std::normal_distribution<double> n01;
    Eigen::MatrixXcd a(16, 16);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) a(i, j) = Complex(n01(rng), n01(rng));
    a += 12.0 * Eigen::MatrixXcd::Identity(16, 16);
    Eigen::VectorXcd b(16);
    for (int i = 0; i < 16; ++i) b[i] = Complex(n01(rng), n01(rng));
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(16, 16);
    const Eigen::VectorXcd x1 = solve_density(a, b, SolveMethod::direct).coefficients;
    const Eigen::VectorXcd x2 = solve_density(a, b, SolveMethod::least_squares, &id).coefficients;
    CHECK((x1 - x2).norm() <= 1e-10 * x1.norm());
    CHECK((a * x1 - b).norm() <= 1e-12 * b.norm());

    // A nontrivial metric leaves the solution of a square system unchanged.
    Eigen::MatrixXd v = Eigen::MatrixXd::Random(16, 16);
    v = v * v.transpose() + Eigen::MatrixXd::Identity(16, 16);
    const Eigen::VectorXcd x3 = solve_density(a, b, SolveMethod::least_squares, &v).coefficients;
    CHECK((x1 - x3).norm() <= 1e-9 * x1.norm());

    CHECK_THROWS_AS(solve_density(a, b, SolveMethod::least_squares), DomainError);
    CHECK_THROWS_AS(solve_density(a, Eigen::VectorXcd::Zero(3), SolveMethod::direct), DomainError);
}

TEST_CASE("least squares on an assembled operator") {
    const Mesh m = circle_mesh(48);
    const Wavenumber k(3.0);
    const GalerkinMatrix a = assemble_operator(m, k);
    const GramMatrix vk = assemble_gram(m, k, GramKind::Vk_trace_surrogate);
    const Eigen::VectorXcd g = assemble_rhs(m, {Point::UnitX(), 3.0});
    const Eigen::VectorXcd x1 = solve_density(a, g).coefficients;
    const Eigen::VectorXcd x2 = solve_density(a, g, SolveMethod::least_squares, &vk).coefficients;
    CHECK((x1 - x2).norm() <= 1e-9 * x1.norm());
}

TEST_CASE("singular systems raise a near-resonance error") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(3, 3);
    a(2, 2) = 0.0;
    GalerkinMatrix ga;
    ga.entries = a;
    ga.k = Wavenumber(4.25);
    try {
        solve_density(ga, Eigen::VectorXcd::Ones(3));
        FAIL("expected an exception");
    } catch (const NearResonanceError& e) {
        CHECK(e.k() == 4.25);
        CHECK(std::string(e.category()) == "resonance");
    }
    GramMatrix id{Eigen::MatrixXd::Identity(3, 3), GramKind::L2_diagonal, std::nullopt};
    CHECK_THROWS_AS(solve_density(ga, Eigen::VectorXcd::Ones(3), SolveMethod::least_squares, &id),
                    NearResonanceError);
}

TEST_CASE("solution reciprocity under the bilinear pairing") {
    const Mesh m = circle_mesh(32);
    const GalerkinMatrix a = assemble_operator(m, Wavenumber(6.0));
    std::mt19937 rng(9);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd g1(32), g2(32);
        for (int i = 0; i < 32; ++i) {
            g1[i] = Complex(n01(rng), n01(rng));
            g2[i] = Complex(n01(rng), n01(rng));
        }
        const Complex p12 = solve_density(a, g1).coefficients.transpose() * g2;
        const Complex p21 = solve_density(a, g2).coefficients.transpose() * g1;
        CHECK(std::abs(p12 - p21) <= 1e-10 * std::abs(p12));
    }
}

TEST_CASE("scattered field evaluation") {
    const Mesh m = one_cell(3, Point::Zero(), 1.0);
    const DensityVector one{Eigen::VectorXcd::Ones(1)};
    const FieldSamples u = evaluate_scattered(m, one, Wavenumber(2.0), {Point(0.3, 0.4, 0.0)});
    const Complex expect = std::exp(Complex(0.0, 1.0)) / (2.0 * pi);
    CHECK_THAT(u.values[0].real(), WithinAbs(expect.real(), 1e-9));
    CHECK_THAT(u.values[0].imag(), WithinAbs(expect.imag(), 1e-9));
    CHECK_THAT(u.values[0].real(), WithinAbs(0.0860, 5e-5));
    CHECK_THAT(u.values[0].imag(), WithinAbs(0.1339, 5e-5));
    CHECK_FALSE(u.low_accuracy[0]);
    CHECK_THROWS_AS(evaluate_scattered(m, one, Wavenumber(2.0), {Point::Zero()}), SingularityError);
    CHECK_THROWS_AS(evaluate_scattered(m, DensityVector{Eigen::VectorXcd::Ones(2)}, Wavenumber(2.0), {Point::UnitX()}),
                    DomainError);

    const Mesh c = circle_mesh(64);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi), rad(1.2, 4.0);
    DensityVector phi{Eigen::VectorXcd::Random(64)};
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) {
        const double t = ang(rng), r = rad(rng);
        pts.push_back(Point(r * std::cos(t), r * std::sin(t), 0.0));
    }
    const FieldSamples u1 = evaluate_scattered(c, phi, Wavenumber(3.0), pts);
    DensityVector twice{2.0 * phi.coefficients};
    const FieldSamples u2 = evaluate_scattered(c, twice, Wavenumber(3.0), pts);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(u2.values[i] - 2.0 * u1.values[i]) <= 1e-14 * std::abs(u2.values[i]));

    const FieldSamples close = evaluate_scattered(c, phi, Wavenumber(3.0), {Point(1.01, 0.0, 0.0)});
    CHECK(close.low_accuracy[0]);
}

TEST_CASE("separation-of-variables references") {
    const double k = 5.0;
    const IncidentWave wave{Point::UnitX(), k};
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) {
        const double t = 2.0 * pi * i / 12.0 + 0.1;
        pts.push_back(3.0 * Point(std::cos(t), std::sin(t), 0.0));
    }
    const FieldSamples ref = mie_reference({MieShape::Kind::circle, 1.0}, wave, pts);
    const FieldSamples more = mie_reference({MieShape::Kind::circle, 1.0}, wave, pts, 10);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Complex o = circle_oracle(k, 1.0, pts[i], 60);
        CHECK(std::abs(ref.values[i] - o) <= 1e-10 * std::abs(o));
        CHECK(std::abs(ref.values[i] - more.values[i]) <= 1e-10);
    }

    // Rotated incidence: the series depends on the angle from the direction.
    const IncidentWave tilted{Point(0.6, 0.8, 0.0), k};
    const Point x(0.6 * 2.0, 0.8 * 2.0, 0.0);
    const Complex forward = mie_reference({MieShape::Kind::circle, 1.0}, tilted, {x}).values[0];
    CHECK(std::abs(forward - circle_oracle(k, 1.0, Point(2.0, 0.0, 0.0), 60)) <= 1e-10);

    // Dirichlet trace on r = R.
    std::vector<Point> ring;
    for (int i = 0; i < 64; ++i) ring.push_back(Point(std::cos(2 * pi * i / 64), std::sin(2 * pi * i / 64), 0.0));
    const FieldSamples trace = mie_reference({MieShape::Kind::circle, 1.0}, wave, ring);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        num += std::norm(trace.values[i] + wave(ring[i]));
        den += std::norm(wave(ring[i]));
    }
    CHECK(std::sqrt(num / den) <= 1e-8);

    // Low frequency: the m = 0 term dominates, with H_0(z) ~ 1 + (2i/pi)(log(z/2) + gamma).
    const IncidentWave low{Point::UnitX(), 0.01};
    const FieldSamples lf = mie_reference({MieShape::Kind::circle, 1.0}, low, {Point(10.0, 0.0, 0.0), Point(0, -10, 0)});
    auto h0_small = [](double z) { return Complex(1.0, 2.0 / pi * (std::log(z / 2.0) + special::euler_gamma)); };
    const Complex lead = -h0_small(0.1) / h0_small(0.01);
    for (const Complex& v : lf.values) CHECK(std::abs(v - lead) <= 0.01 * std::abs(lead));
    CHECK_THAT(std::abs(lead), WithinAbs(0.58, 5e-3));

    const IncidentWave up{Point::UnitZ(), 3.0};
    const std::vector<Point> sp = {Point(0, 0, 2), Point(1.5, 0.5, -1.0), Point(0, 2.5, 0)};
    const FieldSamples sref = mie_reference({MieShape::Kind::sphere, 1.0}, up, sp);
    for (std::size_t i = 0; i < sp.size(); ++i) {
        const Complex o = sphere_oracle(3.0, 1.0, sp[i], 50);
        CHECK(std::abs(sref.values[i] - o) <= 1e-10 * std::abs(o));
    }
    std::vector<Point> shell;
    for (int i = 0; i < 20; ++i) {
        const double ct = -0.95 + 0.1 * i, st = std::sqrt(1.0 - ct * ct);
        shell.push_back(Point(st, 0.0, ct));
    }
    const FieldSamples strace = mie_reference({MieShape::Kind::sphere, 1.0}, up, shell);
    for (std::size_t i = 0; i < shell.size(); ++i) CHECK(std::abs(strace.values[i] + up(shell[i])) <= 1e-8);

    CHECK_THROWS_AS(mie_reference({MieShape::Kind::circle, 1.0}, wave, {Point(0.5, 0.0, 0.0)}), DomainError);
    CHECK_THROWS_AS(mie_reference({MieShape::Kind::circle, 1.0}, wave, pts, -1), DomainError);
}

TEST_CASE("exact circle density") {
    const IncidentWave wave{Point::UnitX(), 5.0};
    for (double t : {0.0, 0.7, 2.0, pi, 4.5}) {
        const Complex o = circle_density_oracle(5.0, 1.0, t, 60);
        CHECK(std::abs(mie_circle_density(1.0, wave, t) - o) <= 1e-10 * std::abs(o));
    }
}

TEST_CASE("boundary residual") {
    const Mesh m = circle_mesh(512);
    const IncidentWave wave{Point::UnitX(), 5.0};
    const DensityVector zero{Eigen::VectorXcd::Zero(512)};
    CHECK_THAT(boundary_residual(m, zero, wave), WithinRel(1.0, 1e-14));

    const DensityVector exact = exact_circle_density(m, 5.0);
    const double r_exact = boundary_residual(m, exact, wave);
    CHECK(r_exact <= 0.02);

    // Solving against 2g gives 2 phi, the residual of the doubled problem.
    const Mesh c = circle_mesh(64);
    const GalerkinMatrix a = assemble_operator(c, Wavenumber(2.0));
    const Eigen::VectorXcd g = assemble_rhs(c, {Point::UnitX(), 2.0});
    const Eigen::VectorXcd phi1 = solve_density(a, g).coefficients;
    const Eigen::VectorXcd phi2 = solve_density(a, Eigen::VectorXcd(2.0 * g)).coefficients;
    CHECK((phi2 - 2.0 * phi1).norm() <= 1e-13 * phi2.norm());
    CHECK(boundary_residual(c, {phi1}, {Point::UnitX(), 2.0}) < 0.1);
}

TEST_CASE("boundary residual decreases under refinement") {
    double prev = 1.0;
    for (std::size_t n : {128, 256, 512}) {
        const Mesh m = circle_mesh(n);
        const double r = boundary_residual(m, solve_circle(n, 5.0), {Point::UnitX(), 5.0});
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("scattered field matches the circle reference") {
    const double k = 5.0;
    const Mesh m = circle_mesh(512);
    const DensityVector phi = solve_circle(512, k);
    std::vector<Point> pts;
    for (int i = 0; i < 16; ++i) {
        const double t = 2.0 * pi * i / 16.0;
        pts.push_back(3.0 * Point(std::cos(t), std::sin(t), 0.0));
    }
    const FieldSamples u = evaluate_scattered(m, phi, Wavenumber(k), pts);
    const FieldSamples ref = mie_reference({MieShape::Kind::circle, 1.0}, {Point::UnitX(), k}, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(std::abs(u.values[i] - ref.values[i]) <= 0.01 * std::abs(ref.values[i]));

    // Far-field pattern against the large-radius field.
    const double big = 400.0;
    const std::vector<double> angles = {0.0, 1.0, 2.5};
    const std::vector<Complex> ff = far_field(m, phi, k, angles);
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const Point x = big * Point(std::cos(angles[i]), std::sin(angles[i]), 0.0);
        const Complex v = evaluate_scattered(m, phi, Wavenumber(k), {x}).values[0];
        const Complex pred = ff[i] * std::exp(Complex(0.0, k * big)) / std::sqrt(big);
        CHECK(std::abs(v - pred) <= 0.01 * std::abs(v));
    }
}

TEST_CASE("field CSV formats") {
    FieldSamples s;
    s.points = {Point(1, 2, 3), Point(0.5, 0, 0)};
    s.values = {Complex(3, 4), Complex(-1, 0)};
    s.low_accuracy = {false, false};
    std::ostringstream two, three, far;
    write_field_csv(two, s, 2);
    write_field_csv(three, s, 3);
    CHECK(two.str() == "x,y,re,im,abs\n1,2,3,4,5\n0.5,0,-1,0,1\n");
    CHECK(three.str() == "x,y,z,re,im,abs\n1,2,3,3,4,5\n0.5,0,0,-1,0,1\n");
    write_far_field_csv(far, {0.0, 1.5}, {Complex(0, 1), Complex(3, -4)});
    CHECK(far.str() == "theta,re,im,abs\n0,0,1,1\n1.5,3,-4,5\n");
}
