// Command-line front end: mesh, assemble, norms, sweep, spectrum, scatter, verify.

#include "kbie/error.hpp"
#include "kbie/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace kbie;

namespace {

struct Options {
    std::string config;
    std::string out;
    int threads = 1;
    long long seed = -1;
    std::string input;
    std::size_t count = 20;
};

int exit_code(const Error& e) {
    const std::string cat = e.category();
    if (cat == "config") return 2;
    if (cat == "io") return 4;
    return 3;
}

SweepConfig load(const Options& opt) {
    if (opt.config.empty()) throw ConfigError(0, "--config is required");
    SweepConfig cfg = load_sweep_config(opt.config);
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out.empty()) cfg.output.dir = opt.out;
    return cfg;
}

fs::path prepare_dir(const SweepConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output.dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output.dir.string() + "': " + ec.message());
    return cfg.output.dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

int cmd_mesh(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const Mesh mesh = build_config_mesh(cfg, cfg.k_single());
    const fs::path path = prepare_dir(cfg) / "mesh.txt";
    write_text(path, mesh_table(mesh));
    std::printf("mesh %s: %zu cells, d=%.12g, total measure %.12g -> %s\n", cfg.geometry.kind_name().c_str(),
                mesh.size(), mesh.hausdorff_dim, mesh.total_measure, path.c_str());
    return 0;
}

int cmd_assemble(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const double k = cfg.k_single();
    const Mesh mesh = build_config_mesh(cfg, k);
    const GalerkinMatrix a = assemble_operator(mesh, Wavenumber(k), cfg.discretization.assembly);
    const fs::path path = prepare_dir(cfg) / "matrix.txt";
    std::ostringstream ss;
    write_matrix(ss, a.entries, a.k, "operator");
    write_text(path, ss.str());
    std::printf("assembled %lld x %lld at k=%.12g -> %s\n", static_cast<long long>(a.size()),
                static_cast<long long>(a.size()), k, path.c_str());
    return 0;
}

int cmd_norms(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const double k = cfg.k_single();
    const Mesh mesh = build_config_mesh(cfg, k);
    const NormReport r = single_report(mesh, k, cfg.discretization.assembly);
    SweepRecord rec = make_record(r);
    if (cfg.envelope) {
        std::optional<SpectrumReport> spec;
        if (cfg.cavity) spec = spectrum_for(*cfg.cavity, k);
        rec.envelope = inverse_bound_envelope(k, *cfg.envelope, spec).bound;
    }
    const fs::path path = prepare_dir(cfg) / "norms.csv";
    emit_csv(path, {rec});
    const ConvertedBounds b = convert_norm_bounds(r, k);
    std::printf("k=%.12g n_dofs=%lld norm_L2=%.12g norm_Hk=%.12g invnorm_Hk=%.12g cond_Hk=%.12g\n", k,
                static_cast<long long>(r.n_dofs), r.norm_L2, r.norm_Hk, r.invnorm_Hk, r.cond_Hk);
    std::printf("unit-wavenumber norm in [%.12g, %.12g], inverse norm in [%.12g, %.12g]\n", b.norm.lo, b.norm.hi,
                b.inverse.lo, b.inverse.hi);
    std::printf("note: Hk values use the damped-kernel V_k surrogate norm\n");
    return 0;
}

int cmd_sweep(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const auto records = run_sweep(cfg, opt.threads);
    const fs::path dir = prepare_dir(cfg);
    emit_csv(dir / cfg.output.csv, records);
    std::printf("%zu records -> %s\n", records.size(), (dir / cfg.output.csv).c_str());
    if (cfg.output.plot) {
        emit_plot(dir / cfg.output.svg, records, cfg.output.columns);
        std::printf("plot -> %s\n", (dir / cfg.output.svg).c_str());
    }
    return 0;
}

int cmd_spectrum(const Options& opt) {
    const SweepConfig cfg = load(opt);
    if (!cfg.cavity) throw ConfigError(0, "spectrum needs a [cavity] section");
    const SpectrumReport s = cavity_eigenvalues(*cfg.cavity, opt.count);
    std::ostringstream ss;
    ss << "index,eigenvalue,sigma,multiplicity\n";
    char buf[128];
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%d\n", i + 1, s.eigenvalues[i], s.sigma[i], s.multiplicity[i]);
        ss << buf;
    }
    const fs::path path = prepare_dir(cfg) / "spectrum.csv";
    write_text(path, ss.str());
    std::printf("%s: %zu distinct eigenvalues -> %s\n", s.cavity.describe().c_str(), s.eigenvalues.size(), path.c_str());
    return 0;
}

std::optional<MieShape> mie_shape(const ObstacleSpec& spec) {
    if (const auto* c = std::get_if<CircleBoundary>(&spec.variant); c && c->center.isZero())
        return MieShape{MieShape::Kind::circle, c->radius};
    if (const auto* s = std::get_if<SphereBoundary>(&spec.variant); s && s->center.isZero())
        return MieShape{MieShape::Kind::sphere, s->radius};
    return std::nullopt;
}

int cmd_scatter(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const ScatterConfig& sc = cfg.scatter;
    const Mesh mesh = build_config_mesh(cfg, sc.k);
    const AssemblyConfig& acfg = cfg.discretization.assembly;
    const auto statics = static_self_energies(mesh, acfg);
    const GalerkinMatrix a = assemble_operator(mesh, Wavenumber(sc.k), acfg, &statics);
    IncidentWave wave{sc.direction, sc.k};
    if (mesh.ambient_dim == 2 && wave.direction.z() != 0.0) throw ConfigError(0, "scatter direction must be planar in 2D");
    const Eigen::VectorXcd g = assemble_rhs(mesh, wave);
    DensityVector phi;
    if (sc.method == SolveMethod::least_squares) {
        const GramMatrix v = assemble_gram(mesh, Wavenumber(sc.k), GramKind::Vk_trace_surrogate, acfg, &statics);
        phi = solve_density(a, g, sc.method, &v);
    } else {
        phi = solve_density(a, g, sc.method);
    }

    std::vector<Point> pts;
    for (int i = 0; i < sc.points; ++i) {
        const double t = 2.0 * special::pi * i / sc.points;
        pts.push_back(sc.radius * Point(std::cos(t), std::sin(t), 0.0));
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * special::pi);
    for (int i = 0; i < sc.random_points; ++i) {
        const double t = angle(rng);
        pts.push_back(sc.radius * Point(std::cos(t), std::sin(t), 0.0));
    }
    const fs::path dir = prepare_dir(cfg);
    const FieldSamples u = evaluate_scattered(mesh, phi, Wavenumber(sc.k), pts);
    std::ostringstream fs1;
    write_field_csv(fs1, u, mesh.ambient_dim);
    write_text(dir / "field.csv", fs1.str());

    std::vector<double> angles;
    for (int i = 0; i < sc.far_field_samples; ++i) angles.push_back(2.0 * special::pi * i / sc.far_field_samples);
    std::ostringstream fs2;
    write_far_field_csv(fs2, angles, far_field(mesh, phi, sc.k, angles));
    write_text(dir / "far_field.csv", fs2.str());

    std::printf("k=%.12g n_dofs=%zu boundary_residual=%.6g\n", sc.k, mesh.size(), boundary_residual(mesh, phi, wave));
    if (const auto shape = mie_shape(cfg.geometry)) {
        const FieldSamples ref = mie_reference(*shape, wave, pts);
        std::ostringstream fs3;
        write_field_csv(fs3, ref, mesh.ambient_dim);
        write_text(dir / "field_reference.csv", fs3.str());
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            worst = std::max(worst, std::abs(u.values[i] - ref.values[i]) / std::abs(ref.values[i]));
        std::printf("max relative deviation from separation-of-variables reference: %.6g\n", worst);
    }
    std::printf("fields -> %s\n", dir.c_str());
    return 0;
}

int cmd_verify(const Options& opt) {
    const SweepConfig cfg = load(opt);
    const auto records = opt.input.empty() ? run_sweep(cfg, opt.threads) : parse_csv(fs::path(opt.input));
    const ScalingReport rep = verify_scaling(records, cfg.verify);
    std::ostringstream ss;
    write_scaling_report(ss, rep);
    write_text(prepare_dir(cfg) / "verify.txt", ss.str());
    std::cout << ss.str();
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavenumber-explicit analysis of first-kind integral operators on rough scatterers"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "Configuration file");
    app.add_option("--out", opt.out, "Output directory (overrides [output] dir)");
    app.add_option("--threads", opt.threads, "Concurrent sweep points")->check(CLI::Range(1, 1024));
    app.add_option("--seed", opt.seed, "Seed for randomized check points (overrides config)")->check(CLI::NonNegativeNumber);

    using Handler = int (*)(const Options&);
    std::vector<std::pair<CLI::App*, Handler>> commands = {
        {app.add_subcommand("mesh", "Dump the quadrature cell table"), cmd_mesh},
        {app.add_subcommand("assemble", "Dump the Galerkin matrix at the configured k"), cmd_assemble},
        {app.add_subcommand("norms", "Norm report at a single wavenumber"), cmd_norms},
        {app.add_subcommand("sweep", "Wavenumber sweep to CSV and SVG"), cmd_sweep},
        {app.add_subcommand("spectrum", "Dirichlet cavity eigenvalues"), cmd_spectrum},
        {app.add_subcommand("scatter", "Plane-wave scattering fields"), cmd_scatter},
        {app.add_subcommand("verify", "Fit scaling exponents and check targets"), cmd_verify},
    };
    commands[4].first->add_option("--count", opt.count, "Number of eigenvalues")->check(CLI::PositiveNumber);
    commands[6].first->add_option("--input", opt.input, "Existing sweep CSV (skips the sweep)");
    for (auto& [sub, _] : commands) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error[config] %s\n", e.what());
        return 2;
    }

    try {
        for (auto& [sub, handler] : commands)
            if (sub->parsed()) return handler(opt);
    } catch (const Error& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        std::fprintf(stderr, "error[%s] %s\n", e.category(), msg.c_str());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal] %s\n", e.what());
        return 3;
    }
    return 0;
}
