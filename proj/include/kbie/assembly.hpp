#pragma once

#include "kbie/geometry.hpp"
#include "kbie/special.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kbie {

struct AssemblyConfig {
    /// Pairs with |b_i - b_j| >= eta (diam_i + diam_j) use the one-point rule.
    double eta = 1.0;
    /// Subdivision levels for near off-diagonal pairs.
    int max_subdivision_depth = 4;
    /// Subdivision levels for the smooth part of the diagonal entries. The
    /// static part always recurses max_subdivision_depth + 2 levels.
    int near_diagonal_quadrature_order = 2;
    /// Debug path: assemble every (i, j) independently instead of mirroring i <= j.
    bool full_assembly = false;

    void validate() const;
};

/// Fundamental solution split as Phi = singular + smooth, where the singular
/// part is the Laplace kernel -log(r)/(2 pi) (n=2) or 1/(4 pi r) (n=3).
class Kernel {
public:
    Kernel(int n, Wavenumber k);

    Complex operator()(double r) const;
    double singular(double r) const;
    /// Phi - singular; at r = 0 the finite limit.
    Complex smooth(double r) const;

    int dimension() const noexcept { return n_; }
    const Wavenumber& wavenumber() const noexcept { return k_; }

private:
    int n_;
    Wavenumber k_;
    Complex smooth_at_zero_;
};

struct GalerkinMatrix {
    Eigen::MatrixXcd entries;
    Wavenumber k{1.0};
    std::uint64_t mesh_fingerprint = 0;
    double symmetry_defect = 0.0;

    Eigen::Index size() const { return entries.rows(); }
};

enum class GramKind { Vk_trace_surrogate, L2_diagonal };

const char* to_string(GramKind kind);

struct GramMatrix {
    Eigen::MatrixXd entries;
    GramKind kind = GramKind::L2_diagonal;
    std::optional<Wavenumber> k;

    Eigen::Index size() const { return entries.rows(); }
    /// Smallest eigenvalue (dense symmetric eigensolve).
    double min_eigenvalue() const;
};

/// Static self-energy of a cell: the integral of the Laplace kernel over
/// cell x cell via the self-similar closure. `depth` bounds the recursion used
/// for the cross terms between distinct children.
double static_self_energy(const Patch& cell, int n, int depth = 6, double eta = 1.0);

/// Per-cell static self energies; k-independent, reusable across a sweep.
std::vector<double> static_self_energies(const Mesh& mesh, const AssemblyConfig& cfg = {});

/// A_ij ~ int int Phi_k(x,y) dmu(y) dmu(x) over cell_i x cell_j.
GalerkinMatrix assemble_operator(const Mesh& mesh, const Wavenumber& k, const AssemblyConfig& cfg = {},
                                 const std::vector<double>* static_cache = nullptr);

GramMatrix assemble_gram(const Mesh& mesh, const Wavenumber& k, GramKind kind, const AssemblyConfig& cfg = {},
                         const std::vector<double>* static_cache = nullptr);

/// Near-pair integral of `kernel` over a x b by recursive subdivision.
Complex integrate_pair(const Patch& a, const Patch& b, const Kernel& kernel, int depth, double eta);

/// Plain-text matrix interchange: header `N k mode kind`, then N^2 lines `i j re im`.
void write_matrix(std::ostream& os, const Eigen::MatrixXcd& m, const Wavenumber& k, const std::string& kind);

struct MatrixDump {
    Eigen::MatrixXcd entries;
    Wavenumber k{1.0};
    std::string kind;
};

MatrixDump read_matrix(std::istream& is);

}  // namespace kbie
