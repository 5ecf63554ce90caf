#pragma once

#include "kbie/assembly.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

namespace kbie {

/// Plane wave exp(i k d.x) with |d| = 1.
struct IncidentWave {
    Point direction = Point::UnitX();
    double k = 1.0;

    void validate() const;
    Complex operator()(const Point& x) const;
};

struct DensityVector {
    Eigen::VectorXcd coefficients;
};

struct FieldSamples {
    std::vector<Point> points;
    std::vector<Complex> values;
    /// Set for points closer than one cell diameter to some cell.
    std::vector<bool> low_accuracy;
};

/// g_i = -w_i u^i(b_i).
Eigen::VectorXcd assemble_rhs(const Mesh& mesh, const IncidentWave& wave);

enum class SolveMethod { direct, least_squares };

/// Direct: LU with partial pivoting, NearResonanceError when a pivot falls
/// below 1e-14 ||A||. Least squares: minimizes the V^{-1}-weighted residual,
/// i.e. solves A^H V^{-1} A phi = A^H V^{-1} g (through a QR of L^{-1} A).
DensityVector solve_density(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& g, SolveMethod method,
                            const Eigen::MatrixXd* v = nullptr, double k = 0.0);
DensityVector solve_density(const GalerkinMatrix& a, const Eigen::VectorXcd& g, SolveMethod method = SolveMethod::direct,
                            const GramMatrix* v = nullptr);

/// u(x) = sum_j phi_j int_{cell_j} Phi_k(x, y) dmu(y). Cells within two
/// diameters of x are subdivided (up to `near_depth` levels).
FieldSamples evaluate_scattered(const Mesh& mesh, const DensityVector& phi, const Wavenumber& k,
                                const std::vector<Point>& points, int near_depth = 4);

/// Relative L2(Gamma) size of the total field at check points one cell
/// diameter off Gamma: inward for closed boundaries, along the normal for
/// screens, and along +x by a quarter diameter for cells without a normal.
double boundary_residual(const Mesh& mesh, const DensityVector& phi, const IncidentWave& wave);

/// Far-field pattern in the direction (cos t, sin t, 0) for each angle t.
std::vector<Complex> far_field(const Mesh& mesh, const DensityVector& phi, double k, const std::vector<double>& angles);

// ---- Separation-of-variables references (obstacle centred at the origin) ----

struct MieShape {
    enum class Kind { circle, sphere } kind = Kind::circle;
    double radius = 1.0;
};

/// Scattered field of a sound-soft circle or sphere, truncated at order kR + 40 (+ extra).
FieldSamples mie_reference(const MieShape& shape, const IncidentWave& wave, const std::vector<Point>& points,
                           int extra_terms = 0);

/// Exact single-layer density -d_r u^t on the circle of radius R at polar angle theta.
Complex mie_circle_density(double radius, const IncidentWave& wave, double theta);

void write_field_csv(std::ostream& os, const FieldSamples& samples, int ambient_dim);
void write_far_field_csv(std::ostream& os, const std::vector<double>& angles, const std::vector<Complex>& values);

}  // namespace kbie
