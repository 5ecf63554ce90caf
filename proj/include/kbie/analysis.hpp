#pragma once

#include "kbie/assembly.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kbie {

struct SingularExtremes {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Extreme singular values of L^{-1} A L^{-T} with G = L L^T. A diagonal G
/// is handled by direct scaling. sigma_min below N * eps * sigma_max is
/// reported as exactly 0.
SingularExtremes weighted_extremes(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& g);
SingularExtremes weighted_extremes(const GalerkinMatrix& a, const GramMatrix& g);

/// Discrete norms of one Galerkin matrix. Hk quantities are measured in the
/// V_k (damped-kernel) metric, a surrogate for the trace norms; surrogate_flag
/// records that and is always true.
struct NormReport {
    double k = 0.0;
    double norm_L2 = 0.0;
    double norm_Hk = 0.0;
    double invnorm_Hk = 0.0;  // +inf when sigma_min == 0
    double cond_Hk = 0.0;
    double sigma_min = 0.0;  // V_k-weighted extremes
    double sigma_max = 0.0;
    Eigen::Index n_dofs = 0;
    bool surrogate_flag = true;
};

NormReport norm_report(const GalerkinMatrix& a, const GramMatrix& l2, const GramMatrix& vk);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Bounds for the unit-wavenumber norms implied by the k-weighted ones.
struct ConvertedBounds {
    Interval norm;
    Interval inverse;
};

ConvertedBounds convert_norm_bounds(const NormReport& report, double k);

// ---- Dirichlet cavity spectra ----

struct RectangleCavity {
    double a = 1.0;
    double b = 1.0;
};

struct DiscCavity {
    double radius = 1.0;
};

struct CavityShape {
    enum class Kind { none, rectangle, disc } kind = Kind::none;
    RectangleCavity rectangle;
    DiscCavity disc;

    static CavityShape empty() { return {}; }
    static CavityShape make_rectangle(double a, double b) { return {Kind::rectangle, {a, b}, {}}; }
    static CavityShape make_disc(double r) { return {Kind::disc, {}, {r}}; }
    std::string describe() const;
};

/// Distinct Dirichlet eigenvalues, strictly increasing, with multiplicities.
/// sigma[i] = sqrt(eigenvalues[i]).
struct SpectrumReport {
    CavityShape cavity;
    std::vector<double> eigenvalues;
    std::vector<int> multiplicity;
    std::vector<double> sigma;
};

/// The `count` smallest eigenvalues counted with multiplicity (the final
/// distinct value may be included with its full multiplicity).
SpectrumReport cavity_eigenvalues(const CavityShape& shape, std::size_t count);

/// n-th positive zero (n >= 1) of J_m, by bracketing and bisection.
double bessel_j_zero(int m, int n);

/// 1 / min_j |k^2 - lambda_j|; 0 for an empty cavity, +inf on an eigenvalue.
double cavity_resolvent_factor(double k, const SpectrumReport& spectrum);

// ---- Inverse-norm envelopes ----

struct EnvelopeModel {
    enum class Kind { nontrapping, smooth_worst_case } kind = Kind::nontrapping;
    double C = 1.0;      // outer constant
    double C_R = 1.0;    // cut-off resolvent constant
    double alpha = 0.0;  // exponential rate, worst case only
    int n = 2;           // ambient dimension
    double delta = 0.1;  // exponent slack of the polynomial envelope

    void validate() const;
};

struct EnvelopeValue {
    double bound = 0.0;       // C k^2 (C_{k,R} + C_k)
    double polynomial = 0.0;  // C k^{2n+2+delta}
};

/// Cut-off resolvent model: C_R / k (nontrapping) or C_R e^{alpha k}.
double cutoff_resolvent(double k, const EnvelopeModel& model);

EnvelopeValue inverse_bound_envelope(double k, const EnvelopeModel& model,
                                     const std::optional<SpectrumReport>& spectrum = std::nullopt);

// ---- Quasi-mode lower bound ----

/// sigma(x) = (1 - |x - c|^2 / rho0^2)^3 inside the support ball.
struct BumpSpec {
    Point center = Point::Zero();
    double radius = 1.0;
};

struct BumpNorms {
    double l2 = 0.0;       // ||sigma||
    double dx1 = 0.0;      // ||d sigma / d x1||
    double laplace = 0.0;  // ||Laplace sigma||
};

/// Norms of the bump profile in the plane, by Gauss-Legendre radial quadrature.
BumpNorms bump_norms(const BumpSpec& bump);

/// k ||sigma|| / (||d_1 sigma|| + ||Laplace sigma|| / k). The bump must lie in
/// the interior of `obstacle` (disc or square volume, or a closed boundary).
double quasimode_lower_bound(const BumpSpec& bump, double k);
double quasimode_lower_bound(const BumpSpec& bump, double k, const ObstacleSpec& obstacle);

// ---- Scaling fits ----

struct Sample {
    double k = 0.0;
    double value = 0.0;
};

struct PowerFit {
    double exponent = 0.0;
    double constant = 0.0;
};

/// Least-squares fit of log value = log C + p log k over samples with k in
/// [k_lo, k_hi] (the full range by default).
PowerFit fit_slope(const std::vector<Sample>& samples, std::optional<std::pair<double, double>> window = {});

/// Smallest C with value <= C k^p at every (finite) sample, for fixed p.
PowerFit upper_envelope(const std::vector<Sample>& samples, double exponent);

/// Measure of {k : value(k) > C k^p} over the sampled range, with the
/// difference interpolated linearly between samples.
double exclusion_measure(const std::vector<Sample>& samples, const PowerFit& envelope);

}  // namespace kbie
