#pragma once

#include "kbie/analysis.hpp"
#include "kbie/config.hpp"
#include "kbie/scatter.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kbie {

struct DiscretizationConfig {
    /// Target cell count (non-IFS geometries); the minimum when cells_per_k > 0.
    std::size_t cells = 256;
    /// When positive, each wavenumber gets its own mesh with
    /// max(cells, round(cells_per_k * k)) cells.
    double cells_per_k = 0.0;
    AssemblyConfig assembly;
};

struct SweepRange {
    enum class Spacing { linear, log } spacing = Spacing::linear;
    double k_min = 1.0;
    double k_max = 2.0;
    int samples = 2;

    void validate() const;
    std::vector<double> grid() const;
};

struct OutputConfig {
    std::filesystem::path dir = ".";
    std::string csv = "sweep.csv";
    std::string svg = "sweep.svg";
    bool plot = true;
    /// Wall-clock times break byte-identical reruns, so they are off by default.
    bool record_timing = false;
    std::vector<std::string> columns = {"norm_L2", "norm_Hk", "invnorm_Hk", "cond_Hk"};
};

struct ScatterConfig {
    Point direction = Point::UnitX();
    double k = 1.0;
    SolveMethod method = SolveMethod::direct;
    double radius = 3.0;          // ring (sphere) of evaluation points
    int points = 16;              // evenly spaced points on the ring
    int random_points = 0;        // extra points on the ring drawn from `seed`
    int far_field_samples = 360;  // polar scan resolution
};

struct VerifyTargets {
    std::optional<Interval> norm_slope;
    std::optional<double> cond_slope_max;
    std::optional<double> invnorm_slope_max;
    /// Envelope C k^p: C fitted on the lower half in k, measured on the rest.
    std::optional<double> envelope_exponent;
    double exclusion_max = 0.1;
};

struct SweepConfig {
    ObstacleSpec geometry;
    DiscretizationConfig discretization;
    SweepRange sweep;
    std::optional<double> single_k;  // for the single-wavenumber commands
    std::optional<CavityShape> cavity;
    std::optional<EnvelopeModel> envelope;
    OutputConfig output;
    ScatterConfig scatter;
    VerifyTargets verify;
    std::uint64_t seed = 0;

    double k_single() const { return single_k.value_or(sweep.k_min); }
    std::size_t cells_at(double k) const;
};

SweepConfig parse_sweep_config(const ConfigDocument& doc);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepRecord {
    double k = 0.0;
    Eigen::Index n_dofs = 0;
    double norm_L2 = 0.0;
    double norm_Hk = 0.0;
    double invnorm_Hk = 0.0;
    double cond_Hk = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    std::optional<double> envelope;
    double wall_ms = 0.0;
};

SweepRecord make_record(const NormReport& report);

/// One NormReport at wavenumber k (mesh built or reused by the caller).
NormReport single_report(const Mesh& mesh, double k, const AssemblyConfig& cfg,
                         const std::vector<double>* static_cache = nullptr);

Mesh build_config_mesh(const SweepConfig& cfg, double k);

/// Records in ascending k. Wavenumbers run concurrently on up to `threads`
/// workers; the merge is by grid index, so output does not depend on threads.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, int threads = 1);

/// Cavity spectrum covering eigenvalues up to (at least) 4 k_max^2.
SpectrumReport spectrum_for(const CavityShape& cavity, double k_max);

inline constexpr const char* kCsvHeader =
    "k,n_dofs,norm_L2,norm_Hk,invnorm_Hk,cond_Hk,sigma_min,sigma_max,envelope,wall_ms";

void emit_csv(std::ostream& os, const std::vector<SweepRecord>& records);
void emit_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> parse_csv(std::istream& is);
std::vector<SweepRecord> parse_csv(const std::filesystem::path& path);

/// Self-contained SVG, log-log axes, one polyline per column. Nonfinite or
/// nonpositive values are left out.
void emit_plot(std::ostream& os, const std::vector<SweepRecord>& records, const std::vector<std::string>& columns);
void emit_plot(const std::filesystem::path& path, const std::vector<SweepRecord>& records,
               const std::vector<std::string>& columns);

/// Value of a named CSV column.
double column_value(const SweepRecord& r, const std::string& column);

struct ScalingCheck {
    std::string name;
    double value = 0.0;
    std::string target;
    bool pass = false;
};

struct ScalingReport {
    PowerFit norm_Hk;
    PowerFit invnorm_Hk;
    PowerFit cond_Hk;
    std::vector<ScalingCheck> checks;

    bool pass() const;
};

/// Fits slopes over the finite records and compares with `targets`. Throws
/// NumericError (insufficient data) with fewer than 4 finite records.
ScalingReport verify_scaling(const std::vector<SweepRecord>& records, const VerifyTargets& targets);

void write_scaling_report(std::ostream& os, const ScalingReport& report);

}  // namespace kbie
