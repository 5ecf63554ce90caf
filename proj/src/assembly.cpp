#include "kbie/assembly.hpp"

#include "kbie/error.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace kbie {

namespace {

constexpr double inv_two_pi = 0.5 / std::numbers::pi;
constexpr double inv_four_pi = 0.25 / std::numbers::pi;

/// Scratch space for the subdivision recursion, one slot per level.
struct Workspace {
    std::vector<Children> left, right;

    void reserve(int depth) {
        const auto need = static_cast<std::size_t>(std::max(depth, 0) + 1);
        if (left.size() < need) {
            left.resize(need);
            right.resize(need);
        }
    }
};

Workspace& workspace(int depth) {
    thread_local Workspace ws;
    ws.reserve(depth);
    return ws;
}

template <class T, class F>
T pair_rule(const Patch& a, const Patch& b, const F& kernel, int depth, double eta, Workspace& ws) {
    const double r = (a.barycenter - b.barycenter).norm();
    // Pairs exactly at the threshold (common for aligned equal cells) are
    // subdivided; the slack keeps that decision independent of rounding.
    if (depth <= 0 || r >= eta * (a.diameter + b.diameter) * (1.0 + 1e-9)) {
        if (!(r > 0.0)) throw SingularityError("distinct cells with coincident barycenters");
        return a.weight * b.weight * kernel(r);
    }
    Children& ca = ws.left[depth];
    Children& cb = ws.right[depth];
    subdivide(a, ca);
    subdivide(b, cb);
    T sum{};
    for (const Patch& x : ca)
        for (const Patch& y : cb) sum += pair_rule<T>(x, y, kernel, depth - 1, eta, ws);
    return sum;
}

Complex smooth_self(const Patch& p, const Kernel& kernel, int depth, Workspace& ws) {
    if (depth <= 0) return p.weight * p.weight * kernel.smooth(0.0);
    Children& ch = ws.left[depth];
    subdivide(p, ch);
    Complex sum = 0.0;
    for (std::size_t i = 0; i < ch.count; ++i) {
        for (std::size_t j = i + 1; j < ch.count; ++j)
            sum += 2.0 * ch.items[i].weight * ch.items[j].weight *
                   kernel.smooth((ch.items[i].barycenter - ch.items[j].barycenter).norm());
    }
    // The recursion below reuses ws.left[depth - 1]; copy the children out first.
    const Children local = ch;
    for (const Patch& c : local) sum += smooth_self(c, kernel, depth - 1, ws);
    return sum;
}

void require_integrable(const Mesh& mesh) {
    if (mesh.cells.empty()) throw DomainError("assembly: empty mesh");
    const int n = mesh.ambient_dim;
    if (n != 2 && n != 3) throw DomainError("assembly: ambient dimension must be 2 or 3");
    if (!(mesh.hausdorff_dim > n - 2))
        throw ModelError("dimension too small for kernel: d=" + std::to_string(mesh.hausdorff_dim) +
                         " <= n-2=" + std::to_string(n - 2));
}

int static_depth(const AssemblyConfig& cfg) { return cfg.max_subdivision_depth + 2; }

/// Points and weights of a cell after enough self-similar splits to hold at
/// least four children.
struct CellRule {
    std::vector<Point> x;
    std::vector<double> w;
};

CellRule cell_rule(const Patch& p) {
    std::vector<Patch> level = {p};
    Children ch;
    for (int depth = 0; level.size() < 4 && depth < 6; ++depth) {
        std::vector<Patch> next;
        for (const Patch& q : level) {
            subdivide(q, ch);
            next.insert(next.end(), ch.begin(), ch.end());
        }
        level = std::move(next);
    }
    CellRule r;
    for (const Patch& q : level) {
        r.x.push_back(q.barycenter);
        r.w.push_back(q.weight);
    }
    return r;
}

/// Im Phi_k, the smooth positive-definite part of the oscillatory kernel.
double imag_kernel(int n, double k, double r) {
    if (n == 3) return r > 0.0 ? std::sin(k * r) * inv_four_pi / r : k * inv_four_pi;
    return 0.25 * special::cylinder_bessel(special::BesselKind::J, 0, k * r);
}

double imag_pair(const CellRule& a, const CellRule& b, int n, double k) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.x.size(); ++p) {
        double row = 0.0;
        for (std::size_t q = 0; q < b.x.size(); ++q) row += b.w[q] * imag_kernel(n, k, (a.x[p] - b.x[q]).norm());
        s += a.w[p] * row;
    }
    return s;
}

Eigen::MatrixXcd assemble_dense(const Mesh& mesh, const Kernel& kernel, const AssemblyConfig& cfg,
                                const std::vector<double>& statics, double& defect) {
    const auto n = static_cast<Eigen::Index>(mesh.cells.size());
    const int dim = kernel.dimension();
    const bool oscillatory = !kernel.wavenumber().damped();
    const double k = kernel.wavenumber().value();
    Eigen::MatrixXcd a(n, n);
    Workspace& ws = workspace(std::max(cfg.max_subdivision_depth, cfg.near_diagonal_quadrature_order));
    const auto& cells = mesh.cells;

    // Real part: singular split on the diagonal, adaptive subdivision for near pairs.
    auto re = [&](double r) {
        if (dim == 2 && oscillatory) return -0.25 * special::cylinder_bessel(special::BesselKind::Y, 0, k * r);
        return kernel(r).real();
    };
    auto re_pair = [&](Eigen::Index i, Eigen::Index j) {
        return pair_rule<double>(cells[i].patch, cells[j].patch, re, cfg.max_subdivision_depth, cfg.eta, ws);
    };
    // Imaginary part: one fixed tensor rule for every pair, so Im(A) = P^T K P
    // with K a positive-definite kernel matrix and the discrete form stays
    // positive semidefinite.
    std::vector<CellRule> rules;
    if (oscillatory) {
        rules.reserve(cells.size());
        for (const auto& c : cells) rules.push_back(cell_rule(c.patch));
    }
    auto im_pair = [&](Eigen::Index i, Eigen::Index j) {
        return oscillatory ? imag_pair(rules[i], rules[j], dim, k) : 0.0;
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = Complex(statics[i] + smooth_self(cells[i].patch, kernel, cfg.near_diagonal_quadrature_order, ws).real(),
                          im_pair(i, i));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Complex v(re_pair(i, j), im_pair(i, j));
            a(i, j) = v;
            a(j, i) = cfg.full_assembly ? Complex(re_pair(j, i), im_pair(j, i)) : v;
        }
    }
    defect = 0.0;
    if (cfg.full_assembly)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) defect = std::max(defect, std::abs(a(i, j) - a(j, i)));
    return a;
}

}  // namespace

void AssemblyConfig::validate() const {
    if (!(eta > 0.0)) throw DomainError("assembly: eta must be positive");
    if (max_subdivision_depth < 0 || max_subdivision_depth > 12)
        throw DomainError("assembly: max_subdivision_depth must lie in [0, 12]");
    if (near_diagonal_quadrature_order < 1 || near_diagonal_quadrature_order > 12)
        throw DomainError("assembly: near_diagonal_quadrature_order must lie in [1, 12]");
}

Kernel::Kernel(int n, Wavenumber k) : n_(n), k_(k) {
    if (n != 2 && n != 3) throw DomainError("kernel: dimension must be 2 or 3");
    const double kv = k.value();
    if (n == 3) {
        smooth_at_zero_ = k.damped() ? Complex(-kv * inv_four_pi, 0.0) : Complex(0.0, kv * inv_four_pi);
    } else {
        const double re = -inv_two_pi * (std::log(0.5 * kv) + special::euler_gamma);
        smooth_at_zero_ = k.damped() ? Complex(re, 0.0) : Complex(re, 0.25);
    }
}

Complex Kernel::operator()(double r) const { return special::fundamental_solution(n_, k_, r); }

double Kernel::singular(double r) const {
    if (!(r > 0.0)) throw SingularityError("singular kernel at r = 0");
    return n_ == 3 ? inv_four_pi / r : -inv_two_pi * std::log(r);
}

Complex Kernel::smooth(double r) const {
    const double kr = k_.value() * r;
    if (!(kr > 1e-12)) return smooth_at_zero_;
    if (n_ == 3) {
        if (k_.damped()) return {std::expm1(-kr) * inv_four_pi / r, 0.0};
        const double s = std::sin(0.5 * kr);
        return Complex(-2.0 * s * s, std::sin(kr)) * (inv_four_pi / r);
    }
    return special::fundamental_solution(2, k_, r) + inv_two_pi * std::log(r);
}

const char* to_string(GramKind kind) {
    return kind == GramKind::Vk_trace_surrogate ? "Vk_trace_surrogate" : "L2_diagonal";
}

double GramMatrix::min_eigenvalue() const {
    if (entries.rows() == 0) throw DomainError("gram: empty matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("gram: eigensolver failed");
    return es.eigenvalues().minCoeff();
}

Complex integrate_pair(const Patch& a, const Patch& b, const Kernel& kernel, int depth, double eta) {
    Workspace& ws = workspace(depth);
    return pair_rule<Complex>(a, b, kernel, depth, eta, ws);
}

namespace {

/// Covariance of a child patch from its parent's: exact for IFS cells,
/// segments, triangles and parallelograms (children are scaled copies up to a
/// point reflection), a close approximation for annular sectors.
Eigen::Matrix3d child_covariance(const Patch& parent, const Eigen::Matrix3d& cov, const Patch& child) {
    if (child.shape == PatchShape::ifs) return covariance(child);
    const double s = child.diameter / parent.diameter;
    return s * s * cov;
}

/// Laplace-kernel pair integral for the self-energy closure. Leaves use the
/// barycenter rule plus its second-moment correction
/// (1/2) tr(H_f(b_a - b_b) (C_a + C_b)), which removes the O(h^2) bias the
/// plain rule leaves in the closure. Covariances travel down the recursion.
double closure_pair(const Patch& a, const Eigen::Matrix3d& cov_a, const Patch& b, const Eigen::Matrix3d& cov_b, int n,
                    int depth, double eta, Workspace& ws) {
    const Point z = a.barycenter - b.barycenter;
    const double r = z.norm();
    if (depth <= 0 || r >= eta * (a.diameter + b.diameter) * (1.0 + 1e-9)) {
        if (!(r > 0.0)) throw SingularityError("distinct cells with coincident barycenters");
        double f, d1, d2;
        if (n == 3) {
            f = inv_four_pi / r;
            d1 = -inv_four_pi / (r * r);
            d2 = 2.0 * inv_four_pi / (r * r * r);
        } else {
            f = -inv_two_pi * std::log(r);
            d1 = -inv_two_pi / r;
            d2 = inv_two_pi / (r * r);
        }
        const Eigen::Matrix3d c = cov_a + cov_b;
        const Point u = z / r;
        const double radial = u.dot(c * u);
        return a.weight * b.weight * (f + 0.5 * (d2 * radial + d1 / r * (c.trace() - radial)));
    }
    Children& ca = ws.left[depth];
    Children& cb = ws.right[depth];
    subdivide(a, ca);
    subdivide(b, cb);
    double sum = 0.0;
    for (const Patch& x : ca) {
        const Eigen::Matrix3d cx = child_covariance(a, cov_a, x);
        for (const Patch& y : cb)
            sum += closure_pair(x, cx, y, child_covariance(b, cov_b, y), n, depth - 1, eta, ws);
    }
    return sum;
}

}  // namespace

double static_self_energy(const Patch& cell, int n, int depth, double eta) {
    if (n != 2 && n != 3) throw DomainError("static_self_energy: dimension must be 2 or 3");
    if (depth < 1) throw DomainError("static_self_energy: depth must be at least 1");
    Workspace& ws = workspace(depth);
    const Children ch = [&] {
        Children c;
        subdivide(cell, c);
        return c;
    }();
    std::array<Eigen::Matrix3d, kMaxChildren> covs;
    for (std::size_t i = 0; i < ch.count; ++i) covs[i] = covariance(ch.items[i]);

    double cross = 0.0;
    for (std::size_t i = 0; i < ch.count; ++i)
        for (std::size_t j = i + 1; j < ch.count; ++j)
            cross += 2.0 * closure_pair(ch.items[i], covs[i], ch.items[j], covs[j], n, depth - 1, eta, ws);

    // Each child j is a copy of the cell scaled by rho_j carrying mass fraction p_j.
    const double w = cell.weight;
    double sum_p2 = 0.0, sum_p2_over_rho = 0.0, sum_p2_log_rho = 0.0;
    for (const Patch& c : ch) {
        const double p = c.weight / w;
        const double rho = c.diameter / cell.diameter;
        sum_p2 += p * p;
        sum_p2_over_rho += p * p / rho;
        sum_p2_log_rho += p * p * std::log(rho);
    }
    if (n == 3) {
        const double denom = 1.0 - sum_p2_over_rho;
        if (!(denom > 1e-12))
            throw ModelError("dimension too small for kernel: 1/r self-energy diverges (d <= 1)");
        return cross / denom;
    }
    return (cross - w * w * inv_two_pi * sum_p2_log_rho) / (1.0 - sum_p2);
}

std::vector<double> static_self_energies(const Mesh& mesh, const AssemblyConfig& cfg) {
    cfg.validate();
    require_integrable(mesh);
    std::vector<double> out;
    out.reserve(mesh.cells.size());
    for (const auto& c : mesh.cells)
        out.push_back(static_self_energy(c.patch, mesh.ambient_dim, static_depth(cfg), cfg.eta));
    return out;
}

GalerkinMatrix assemble_operator(const Mesh& mesh, const Wavenumber& k, const AssemblyConfig& cfg,
                                 const std::vector<double>* static_cache) {
    cfg.validate();
    require_integrable(mesh);
    std::vector<double> own;
    if (!static_cache) {
        own = static_self_energies(mesh, cfg);
        static_cache = &own;
    } else if (static_cache->size() != mesh.cells.size()) {
        throw DomainError("assemble_operator: static cache does not match mesh");
    }
    GalerkinMatrix out;
    out.k = k;
    out.mesh_fingerprint = mesh.fingerprint();
    out.entries = assemble_dense(mesh, Kernel(mesh.ambient_dim, k), cfg, *static_cache, out.symmetry_defect);
    return out;
}

GramMatrix assemble_gram(const Mesh& mesh, const Wavenumber& k, GramKind kind, const AssemblyConfig& cfg,
                         const std::vector<double>* static_cache) {
    GramMatrix g;
    g.kind = kind;
    if (kind == GramKind::L2_diagonal) {
        if (mesh.cells.empty()) throw DomainError("assemble_gram: empty mesh");
        const auto n = static_cast<Eigen::Index>(mesh.cells.size());
        g.entries = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) g.entries(i, i) = mesh.cells[i].weight();
        return g;
    }
    const Wavenumber damped = Wavenumber::damped(k.value());
    g.k = damped;
    g.entries = assemble_operator(mesh, damped, cfg, static_cache).entries.real();
    return g;
}

}  // namespace kbie
