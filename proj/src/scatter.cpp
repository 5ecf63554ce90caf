#include "kbie/scatter.hpp"

#include "kbie/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace kbie {

namespace {

/// int_{patch} Phi(x, y) dmu(y), subdividing while x is within two diameters.
Complex point_integral(const Point& x, const Patch& p, const Kernel& kernel, int depth) {
    const double r = (x - p.barycenter).norm();
    if (depth <= 0 || r >= 2.0 * p.diameter) {
        if (!(r > 0.0)) throw SingularityError("evaluation point coincides with a cell barycenter");
        return p.weight * kernel(r);
    }
    Children ch;
    subdivide(p, ch);
    Complex sum = 0.0;
    for (const Patch& c : ch) sum += point_integral(x, c, kernel, depth - 1);
    return sum;
}

}  // namespace

void IncidentWave::validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("incident wave: k must be positive");
    if (!direction.allFinite() || std::abs(direction.norm() - 1.0) > 1e-14)
        throw DomainError("incident wave: direction must be a unit vector");
}

Complex IncidentWave::operator()(const Point& x) const {
    const double phase = k * direction.dot(x);
    return {std::cos(phase), std::sin(phase)};
}

Eigen::VectorXcd assemble_rhs(const Mesh& mesh, const IncidentWave& wave) {
    wave.validate();
    Eigen::VectorXcd g(static_cast<Eigen::Index>(mesh.cells.size()));
    for (std::size_t i = 0; i < mesh.cells.size(); ++i)
        g[static_cast<Eigen::Index>(i)] = -mesh.cells[i].weight() * wave(mesh.cells[i].barycenter());
    return g;
}

DensityVector solve_density(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& g, SolveMethod method,
                            const Eigen::MatrixXd* v, double k) {
    if (a.rows() == 0 || a.rows() != a.cols()) throw DomainError("solve_density: A must be square and nonempty");
    if (g.size() != a.rows()) throw DomainError("solve_density: right-hand side size mismatch");
    if (method == SolveMethod::direct) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
        const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        if (!(pivot >= 1e-14 * norm)) {
            const double rc = lu.rcond();
            throw NearResonanceError(k, rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
        }
        return {lu.solve(g)};
    }
    if (!v) throw DomainError("solve_density: least squares needs a Gram matrix");
    if (v->rows() != a.rows() || v->cols() != a.cols()) throw DomainError("solve_density: Gram size mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(*v);
    if (llt.info() != Eigen::Success) throw NumericError("solve_density: Gram matrix is not positive definite");
    const Eigen::MatrixXcd l = llt.matrixL().toDenseMatrix().cast<Complex>();
    const auto tri = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXcd w = tri.solve(a);
    const Eigen::VectorXcd h = tri.solve(g);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(w);
    qr.setThreshold(1e-14);
    if (qr.rank() < w.cols()) throw NearResonanceError(k, std::numeric_limits<double>::infinity());
    return {qr.solve(h)};
}

DensityVector solve_density(const GalerkinMatrix& a, const Eigen::VectorXcd& g, SolveMethod method,
                            const GramMatrix* v) {
    return solve_density(a.entries, g, method, v ? &v->entries : nullptr, a.k.value());
}

FieldSamples evaluate_scattered(const Mesh& mesh, const DensityVector& phi, const Wavenumber& k,
                                const std::vector<Point>& points, int near_depth) {
    if (static_cast<std::size_t>(phi.coefficients.size()) != mesh.cells.size())
        throw DomainError("evaluate_scattered: density length does not match mesh");
    const Kernel kernel(mesh.ambient_dim, k);
    FieldSamples out;
    out.points = points;
    out.values.reserve(points.size());
    out.low_accuracy.reserve(points.size());
    for (const Point& x : points) {
        if (!x.allFinite()) throw DomainError("evaluate_scattered: non-finite point");
        Complex u = 0.0;
        bool near = false;
        for (std::size_t j = 0; j < mesh.cells.size(); ++j) {
            const Patch& p = mesh.cells[j].patch;
            const double r = (x - p.barycenter).norm();
            if (!(r > 0.0)) throw SingularityError("evaluation point coincides with a cell barycenter");
            near = near || r < p.diameter;
            u += phi.coefficients[static_cast<Eigen::Index>(j)] * point_integral(x, p, kernel, near_depth);
        }
        out.values.push_back(u);
        out.low_accuracy.push_back(near);
    }
    return out;
}

double boundary_residual(const Mesh& mesh, const DensityVector& phi, const IncidentWave& wave) {
    wave.validate();
    std::vector<Point> check;
    check.reserve(mesh.cells.size());
    for (const auto& c : mesh.cells) {
        const double h = c.diameter();
        if (c.normal.squaredNorm() > 0.0)
            check.push_back(c.barycenter() + (mesh.closed_boundary ? -h : h) * c.normal);
        else
            check.push_back(c.barycenter() + 0.25 * h * Point::UnitX());
    }
    const FieldSamples u = evaluate_scattered(mesh, phi, Wavenumber(wave.k), check);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < check.size(); ++j) {
        const Complex ui = wave(check[j]);
        num += mesh.cells[j].weight() * std::norm(u.values[j] + ui);
        den += mesh.cells[j].weight() * std::norm(ui);
    }
    return std::sqrt(num / den);
}

std::vector<Complex> far_field(const Mesh& mesh, const DensityVector& phi, double k, const std::vector<double>& angles) {
    if (static_cast<std::size_t>(phi.coefficients.size()) != mesh.cells.size())
        throw DomainError("far_field: density length does not match mesh");
    if (!(k > 0.0)) throw DomainError("far_field: k must be positive");
    // Phi_k(x, y) ~ c e^{ik|x|}/|x|^{(n-1)/2} e^{-ik xhat.y}
    const Complex c = mesh.ambient_dim == 3 ? Complex(0.25 / special::pi, 0.0)
                                            : std::polar(1.0 / std::sqrt(8.0 * special::pi * k), 0.25 * special::pi);
    std::vector<Complex> out;
    out.reserve(angles.size());
    for (double t : angles) {
        const Point dir(std::cos(t), std::sin(t), 0.0);
        Complex s = 0.0;
        for (std::size_t j = 0; j < mesh.cells.size(); ++j)
            s += mesh.cells[j].weight() * phi.coefficients[static_cast<Eigen::Index>(j)] *
                 std::polar(1.0, -k * dir.dot(mesh.cells[j].barycenter()));
        out.push_back(c * s);
    }
    return out;
}

void write_field_csv(std::ostream& os, const FieldSamples& samples, int ambient_dim) {
    os << (ambient_dim == 3 ? "x,y,z,re,im,abs\n" : "x,y,re,im,abs\n");
    char buf[160];
    for (std::size_t i = 0; i < samples.points.size(); ++i) {
        const Point& p = samples.points[i];
        const Complex v = samples.values[i];
        if (ambient_dim == 3)
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.x(), p.y(), p.z(), v.real(),
                          v.imag(), std::abs(v));
        else
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", p.x(), p.y(), v.real(), v.imag(),
                          std::abs(v));
        os << buf;
    }
    if (!os) throw IoError("field CSV: write failed");
}

void write_far_field_csv(std::ostream& os, const std::vector<double>& angles, const std::vector<Complex>& values) {
    os << "theta,re,im,abs\n";
    char buf[128];
    for (std::size_t i = 0; i < angles.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", angles[i], values[i].real(), values[i].imag(),
                      std::abs(values[i]));
        os << buf;
    }
    if (!os) throw IoError("far-field CSV: write failed");
}

}  // namespace kbie
