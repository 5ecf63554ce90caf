#include "kbie/sweep.hpp"

#include "kbie/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <thread>

namespace kbie {

namespace {

Point read_point(const ConfigValue& v, const std::string& what) {
    const std::vector<double> c = v.as_reals(what);
    if (c.size() != 2 && c.size() != 3)
        throw ConfigError(v.line, what + ": expected 2 or 3 coordinates");
    for (double x : c)
        if (!std::isfinite(x)) throw ConfigError(v.line, what + ": coordinates must be finite");
    return {c[0], c[1], c.size() == 3 ? c[2] : 0.0};
}

Point point_or(const ConfigDocument& doc, const std::string& section, const std::string& key, const Point& fallback) {
    const ConfigValue* v = doc.find(section, key);
    return v ? read_point(*v, key) : fallback;
}

double positive(const ConfigDocument& doc, const std::string& section, const std::string& key, double fallback) {
    const double x = doc.real(section, key, fallback);
    if (!(x > 0.0) || !std::isfinite(x)) {
        const ConfigValue* v = doc.find(section, key);
        throw ConfigError(v ? v->line : doc.section_line(section), key + " must be positive and finite");
    }
    return x;
}

int int_in(const ConfigDocument& doc, const std::string& section, const std::string& key, long long fallback,
           long long lo, long long hi) {
    const long long x = doc.integer(section, key, fallback);
    if (x < lo || x > hi) {
        const ConfigValue* v = doc.find(section, key);
        throw ConfigError(v ? v->line : doc.section_line(section),
                          key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
}

IFSSystem read_maps(const ConfigValue& v) {
    IFSSystem ifs;
    ifs.open_set_condition_declared = true;
    for (const auto& m : v.as_array("maps")) {
        const std::vector<double> c = m.as_reals("maps");
        if (c.size() != 4 && c.size() != 5)
            throw ConfigError(m.line, "maps: each map is [ratio, angle, tx, ty] or [ratio, angle, tx, ty, tz]");
        ifs.maps.push_back({c[0], c[1], Point(c[2], c[3], c.size() == 5 ? c[4] : 0.0)});
    }
    return ifs;
}

ObstacleSpec read_geometry(const ConfigDocument& doc) {
    const std::string s = "geometry";
    if (!doc.has_section(s)) throw ConfigError(0, "missing [geometry] section");
    doc.expect_keys(s, {"kind", "dimension", "radius", "center", "vertices", "side", "corner", "a", "b", "apex",
                        "arm1", "arm2", "maps", "level", "refinement"});
    const ConfigValue& kind_v = doc.require(s, "kind");
    const std::string kind = kind_v.as_string("kind");
    ObstacleSpec spec;
    spec.ambient_dim = kind == "sphere" ? 3 : 2;
    if (const ConfigValue* d = doc.find(s, "dimension")) spec.ambient_dim = static_cast<int>(d->as_integer("dimension"));

    if (kind == "circle") {
        spec.variant = CircleBoundary{positive(doc, s, "radius", 1.0), point_or(doc, s, "center", Point::Zero())};
    } else if (kind == "polygon") {
        PolygonBoundary p;
        for (const auto& v : doc.require(s, "vertices").as_array("vertices")) p.vertices.push_back(read_point(v, "vertices"));
        spec.variant = p;
    } else if (kind == "square_boundary") {
        const double side = positive(doc, s, "side", 1.0);
        const Point c = point_or(doc, s, "corner", Point::Zero());
        spec.variant = PolygonBoundary{{c, c + Point(side, 0, 0), c + Point(side, side, 0), c + Point(0, side, 0)}};
    } else if (kind == "sphere") {
        spec.variant = SphereBoundary{positive(doc, s, "radius", 1.0), int_in(doc, s, "refinement", 0, 0, 9),
                                      point_or(doc, s, "center", Point::Zero())};
    } else if (kind == "segment") {
        spec.variant = SegmentScreen{point_or(doc, s, "a", Point::Zero()), point_or(doc, s, "b", Point::UnitX())};
    } else if (kind == "vee") {
        spec.variant = VeeScreen{point_or(doc, s, "apex", Point::Zero()), point_or(doc, s, "arm1", Point::UnitX()),
                                 point_or(doc, s, "arm2", Point::UnitY())};
    } else if (kind == "disc") {
        spec.variant = DiscVolume{positive(doc, s, "radius", 1.0), point_or(doc, s, "center", Point::Zero())};
    } else if (kind == "square") {
        spec.variant = SquareVolume{positive(doc, s, "side", 1.0), point_or(doc, s, "corner", Point::Zero())};
    } else if (kind == "cantor" || kind == "ifs") {
        IfsAttractorSpec a;
        a.level = int_in(doc, s, "level", 5, 0, 30);
        if (kind == "cantor") {
            a.ifs.maps = {{1.0 / 3.0, 0.0, Point::Zero()}, {1.0 / 3.0, 0.0, Point(2.0 / 3.0, 0.0, 0.0)}};
            a.ifs.open_set_condition_declared = true;
        } else {
            a.ifs = read_maps(doc.require(s, "maps"));
        }
        spec.variant = a;
    } else {
        throw ConfigError(kind_v.line, "unknown geometry kind '" + kind + "'");
    }
    try {
        validate(spec);
    } catch (const ConfigError&) {
        throw;
    } catch (const ModelError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(doc.section_line(s), std::string("invalid geometry: ") + e.what());
    }
    return spec;
}

}  // namespace

void SweepRange::validate() const {
    if (!(k_min > 0.0) || !(k_max > k_min) || !std::isfinite(k_max))
        throw DomainError("sweep: need 0 < k_min < k_max");
    if (samples < 2) throw DomainError("sweep: need at least 2 samples");
}

std::vector<double> SweepRange::grid() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(samples));
    const double last = samples - 1;
    for (int i = 0; i < samples; ++i) {
        const double t = i / last;
        out[static_cast<std::size_t>(i)] =
            spacing == Spacing::linear ? k_min + t * (k_max - k_min) : k_min * std::pow(k_max / k_min, t);
    }
    out.front() = k_min;
    out.back() = k_max;
    return out;
}

std::size_t SweepConfig::cells_at(double k) const {
    if (discretization.cells_per_k > 0.0)
        return std::max(discretization.cells,
                        static_cast<std::size_t>(std::llround(discretization.cells_per_k * k)));
    return discretization.cells;
}

SweepConfig parse_sweep_config(const ConfigDocument& doc) {
    doc.expect_sections({"geometry", "discretization", "sweep", "cavity", "envelope", "output", "scatter", "verify"});
    doc.expect_keys("", {"seed"});
    SweepConfig cfg;
    const long long seed = doc.integer("", "seed", 0);
    if (seed < 0) throw ConfigError(doc.find("", "seed")->line, "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.geometry = read_geometry(doc);

    {
        const std::string s = "discretization";
        doc.expect_keys(s, {"cells", "cells_per_k", "eta", "max_subdivision_depth", "near_diagonal_quadrature_order",
                            "full_assembly"});
        auto& d = cfg.discretization;
        d.cells = static_cast<std::size_t>(int_in(doc, s, "cells", 256, 1, 20000));
        d.cells_per_k = doc.real(s, "cells_per_k", 0.0);
        if (!(d.cells_per_k >= 0.0) || !std::isfinite(d.cells_per_k))
            throw ConfigError(doc.find(s, "cells_per_k")->line, "cells_per_k must be nonnegative");
        d.assembly.eta = positive(doc, s, "eta", 1.0);
        d.assembly.max_subdivision_depth = int_in(doc, s, "max_subdivision_depth", 4, 0, 12);
        d.assembly.near_diagonal_quadrature_order = int_in(doc, s, "near_diagonal_quadrature_order", 2, 1, 12);
        d.assembly.full_assembly = doc.boolean(s, "full_assembly", false);
    }
    {
        const std::string s = "sweep";
        doc.expect_keys(s, {"k_min", "k_max", "samples", "spacing", "k"});
        auto& r = cfg.sweep;
        r.k_min = positive(doc, s, "k_min", 1.0);
        r.k_max = positive(doc, s, "k_max", 2.0);
        r.samples = int_in(doc, s, "samples", 2, 2, 100000);
        const std::string spacing = doc.string(s, "spacing", "linear");
        if (spacing == "linear")
            r.spacing = SweepRange::Spacing::linear;
        else if (spacing == "log")
            r.spacing = SweepRange::Spacing::log;
        else
            throw ConfigError(doc.find(s, "spacing")->line, "spacing must be \"linear\" or \"log\"");
        if (!(r.k_max > r.k_min))
            throw ConfigError(doc.find(s, "k_max") ? doc.find(s, "k_max")->line : doc.section_line(s),
                              "k_max must exceed k_min");
        if (doc.find(s, "k")) cfg.single_k = positive(doc, s, "k", 1.0);
    }
    if (doc.has_section("cavity")) {
        const std::string s = "cavity";
        doc.expect_keys(s, {"shape", "a", "b", "radius"});
        const ConfigValue& shape = doc.require(s, "shape");
        const std::string name = shape.as_string("shape");
        if (name == "rectangle")
            cfg.cavity = CavityShape::make_rectangle(positive(doc, s, "a", 1.0), positive(doc, s, "b", 1.0));
        else if (name == "disc")
            cfg.cavity = CavityShape::make_disc(positive(doc, s, "radius", 1.0));
        else if (name == "none")
            cfg.cavity = CavityShape::empty();
        else
            throw ConfigError(shape.line, "cavity shape must be \"rectangle\", \"disc\" or \"none\"");
    }
    if (doc.has_section("envelope")) {
        const std::string s = "envelope";
        doc.expect_keys(s, {"model", "C", "C_R", "alpha", "delta"});
        EnvelopeModel m;
        const ConfigValue& model = doc.require(s, "model");
        const std::string name = model.as_string("model");
        if (name == "nontrapping")
            m.kind = EnvelopeModel::Kind::nontrapping;
        else if (name == "smooth_worst_case")
            m.kind = EnvelopeModel::Kind::smooth_worst_case;
        else
            throw ConfigError(model.line, "envelope model must be \"nontrapping\" or \"smooth_worst_case\"");
        m.C = positive(doc, s, "C", 1.0);
        m.C_R = positive(doc, s, "C_R", 1.0);
        m.alpha = m.kind == EnvelopeModel::Kind::smooth_worst_case ? positive(doc, s, "alpha", 0.1)
                                                                   : doc.real(s, "alpha", 0.0);
        m.delta = positive(doc, s, "delta", 0.1);
        m.n = cfg.geometry.ambient_dim;
        cfg.envelope = m;
    }
    {
        const std::string s = "output";
        doc.expect_keys(s, {"dir", "csv", "svg", "plot", "record_timing", "columns"});
        auto& o = cfg.output;
        o.dir = doc.string(s, "dir", ".");
        o.csv = doc.string(s, "csv", o.csv);
        o.svg = doc.string(s, "svg", o.svg);
        o.plot = doc.boolean(s, "plot", true);
        o.record_timing = doc.boolean(s, "record_timing", false);
        if (const ConfigValue* c = doc.find(s, "columns")) {
            o.columns.clear();
            for (const auto& v : c->as_array("columns")) {
                const std::string& name = v.as_string("columns");
                try {
                    column_value(SweepRecord{}, name);
                } catch (const Error&) {
                    throw ConfigError(v.line, "unknown column '" + name + "'");
                }
                o.columns.push_back(name);
            }
        }
    }
    {
        const std::string s = "scatter";
        doc.expect_keys(s, {"direction", "k", "method", "radius", "points", "random_points", "far_field_samples"});
        auto& sc = cfg.scatter;
        if (const ConfigValue* d = doc.find(s, "direction")) {
            const Point p = read_point(*d, "direction");
            if (!(p.norm() > 0.0)) throw ConfigError(d->line, "direction must be nonzero");
            sc.direction = p.normalized();
        }
        sc.k = positive(doc, s, "k", cfg.k_single());
        const std::string method = doc.string(s, "method", "direct");
        if (method == "direct")
            sc.method = SolveMethod::direct;
        else if (method == "least_squares")
            sc.method = SolveMethod::least_squares;
        else
            throw ConfigError(doc.find(s, "method")->line, "method must be \"direct\" or \"least_squares\"");
        sc.radius = positive(doc, s, "radius", 3.0);
        sc.points = int_in(doc, s, "points", 16, 0, 1000000);
        sc.random_points = int_in(doc, s, "random_points", 0, 0, 1000000);
        sc.far_field_samples = int_in(doc, s, "far_field_samples", 360, 0, 1000000);
    }
    {
        const std::string s = "verify";
        doc.expect_keys(s, {"norm_slope", "cond_slope_max", "invnorm_slope_max", "envelope_exponent", "exclusion_max"});
        auto& v = cfg.verify;
        if (const ConfigValue* w = doc.find(s, "norm_slope")) {
            const auto b = w->as_reals("norm_slope");
            if (b.size() != 2 || !(b[0] <= b[1])) throw ConfigError(w->line, "norm_slope must be [lo, hi] with lo <= hi");
            v.norm_slope = Interval{b[0], b[1]};
        }
        if (doc.find(s, "cond_slope_max")) v.cond_slope_max = doc.real(s, "cond_slope_max", 0.0);
        if (doc.find(s, "invnorm_slope_max")) v.invnorm_slope_max = doc.real(s, "invnorm_slope_max", 0.0);
        if (doc.find(s, "envelope_exponent")) v.envelope_exponent = doc.real(s, "envelope_exponent", 0.0);
        v.exclusion_max = positive(doc, s, "exclusion_max", 0.1);
    }
    return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
    return parse_sweep_config(ConfigDocument::load(path));
}

SweepRecord make_record(const NormReport& r) {
    SweepRecord rec;
    rec.k = r.k;
    rec.n_dofs = r.n_dofs;
    rec.norm_L2 = r.norm_L2;
    rec.norm_Hk = r.norm_Hk;
    rec.invnorm_Hk = r.invnorm_Hk;
    rec.cond_Hk = r.cond_Hk;
    rec.sigma_min = r.sigma_min;
    rec.sigma_max = r.sigma_max;
    return rec;
}

NormReport single_report(const Mesh& mesh, double k, const AssemblyConfig& cfg,
                         const std::vector<double>* static_cache) {
    std::vector<double> own;
    if (!static_cache) {
        own = static_self_energies(mesh, cfg);
        static_cache = &own;
    }
    const Wavenumber wk(k);
    const GalerkinMatrix a = assemble_operator(mesh, wk, cfg, static_cache);
    const GramMatrix l2 = assemble_gram(mesh, wk, GramKind::L2_diagonal, cfg, static_cache);
    const GramMatrix vk = assemble_gram(mesh, wk, GramKind::Vk_trace_surrogate, cfg, static_cache);
    return norm_report(a, l2, vk);
}

Mesh build_config_mesh(const SweepConfig& cfg, double k) { return build_mesh(cfg.geometry, cfg.cells_at(k)); }

SpectrumReport spectrum_for(const CavityShape& cavity, double k_max) {
    std::size_t count = 16;
    SpectrumReport s = cavity_eigenvalues(cavity, count);
    while (!s.eigenvalues.empty() && s.eigenvalues.back() < 4.0 * k_max * k_max) {
        count *= 2;
        s = cavity_eigenvalues(cavity, count);
    }
    return s;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, int threads) {
    const std::vector<double> grid = cfg.sweep.grid();
    const bool per_k_mesh = cfg.discretization.cells_per_k > 0.0 &&
                            !std::holds_alternative<IfsAttractorSpec>(cfg.geometry.variant);
    const AssemblyConfig& acfg = cfg.discretization.assembly;

    Mesh shared;
    std::vector<double> statics;
    if (!per_k_mesh) {
        shared = build_config_mesh(cfg, grid.front());
        statics = static_self_energies(shared, acfg);
    }
    std::optional<SpectrumReport> spectrum;
    if (cfg.envelope && cfg.cavity) spectrum = spectrum_for(*cfg.cavity, grid.back());

    std::vector<SweepRecord> records(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const double k = grid[i];
                NormReport r;
                if (per_k_mesh) {
                    const Mesh mesh = build_config_mesh(cfg, k);
                    r = single_report(mesh, k, acfg);
                } else {
                    r = single_report(shared, k, acfg, &statics);
                }
                SweepRecord rec = make_record(r);
                if (cfg.envelope) {
                    EnvelopeModel m = *cfg.envelope;
                    m.n = cfg.geometry.ambient_dim;
                    rec.envelope = inverse_bound_envelope(k, m, spectrum).bound;
                }
                if (cfg.output.record_timing)
                    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                records[i] = rec;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::clamp(threads, 1, static_cast<int>(grid.size()));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return records;
}

bool ScalingReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ScalingCheck& c) { return c.pass; });
}

ScalingReport verify_scaling(const std::vector<SweepRecord>& records, const VerifyTargets& targets) {
    std::vector<SweepRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const SweepRecord& a, const SweepRecord& b) { return a.k < b.k; });
    std::vector<Sample> norm, inv, cond;
    for (const auto& r : sorted) {
        const bool finite = std::isfinite(r.norm_Hk) && std::isfinite(r.invnorm_Hk) && std::isfinite(r.cond_Hk) &&
                            r.norm_Hk > 0.0 && r.invnorm_Hk > 0.0 && r.cond_Hk > 0.0;
        if (!finite) continue;
        norm.push_back({r.k, r.norm_Hk});
        inv.push_back({r.k, r.invnorm_Hk});
        cond.push_back({r.k, r.cond_Hk});
    }
    if (norm.size() < 4)
        throw NumericError("insufficient data: verify_scaling needs at least 4 finite records, got " +
                           std::to_string(norm.size()));
    ScalingReport rep;
    rep.norm_Hk = fit_slope(norm);
    rep.invnorm_Hk = fit_slope(inv);
    rep.cond_Hk = fit_slope(cond);
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    if (targets.norm_slope) {
        const Interval w = *targets.norm_slope;
        const double p = rep.norm_Hk.exponent;
        rep.checks.push_back({"norm_Hk_slope", p, "in [" + fmt(w.lo) + ", " + fmt(w.hi) + "]", p >= w.lo && p <= w.hi});
    }
    if (targets.cond_slope_max) {
        const double p = rep.cond_Hk.exponent;
        rep.checks.push_back({"cond_Hk_slope", p, "<= " + fmt(*targets.cond_slope_max), p <= *targets.cond_slope_max});
    }
    if (targets.invnorm_slope_max) {
        const double p = rep.invnorm_Hk.exponent;
        rep.checks.push_back(
            {"invnorm_Hk_slope", p, "<= " + fmt(*targets.invnorm_slope_max), p <= *targets.invnorm_slope_max});
    }
    if (targets.envelope_exponent) {
        std::vector<Sample> all;
        for (const auto& r : sorted) all.push_back({r.k, r.invnorm_Hk});
        const std::size_t half = all.size() / 2;
        const std::vector<Sample> lower(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(half));
        const std::vector<Sample> upper(all.begin() + static_cast<std::ptrdiff_t>(half), all.end());
        const PowerFit env = upper_envelope(lower, *targets.envelope_exponent);
        const double measure = exclusion_measure(upper, env);
        const double length = upper.back().k - upper.front().k;
        rep.checks.push_back({"exclusion_measure", measure, "<= " + fmt(targets.exclusion_max * length),
                              measure <= targets.exclusion_max * length});
    }
    return rep;
}

}  // namespace kbie
