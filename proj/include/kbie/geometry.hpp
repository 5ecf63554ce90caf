#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kbie {

/// Points always carry three coordinates; planar geometry lives in z = 0.
using Point = Eigen::Vector3d;

// ---------------------------------------------------------------------------
// Iterated function systems
// ---------------------------------------------------------------------------

/// Contracting similarity x -> ratio * R(angle) x + translation, rotation about z.
struct SimilarityMap {
    double ratio = 0.5;
    double angle = 0.0;
    Point translation = Point::Zero();
};

struct IFSSystem {
    std::vector<SimilarityMap> maps;
    bool open_set_condition_declared = true;
};

/// Affine map x -> linear * x + offset with linear = scale * orthogonal.
struct Affine {
    Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
    Point offset = Point::Zero();
    double scale = 1.0;

    Point operator()(const Point& x) const { return linear * x + offset; }
    Affine then(const Affine& inner) const;  // this ∘ inner
};

/// Derived, immutable data of an IFS attractor shared by all of its cells.
struct IfsAttractor {
    std::vector<Affine> maps;
    std::vector<double> mass;   // self-similar measure weights rho_j^d (sum to 1)
    double dimension = 0.0;     // Moran solution
    Point barycenter = Point::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // second central moment
    double diameter = 0.0;
};

std::shared_ptr<const IfsAttractor> make_attractor(const IFSSystem& ifs);

/// Unique d >= 0 with sum_j ratios_j^d = 1.
double moran_dimension(const std::vector<double>& ratios);

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

enum class PatchShape : std::uint8_t { segment, triangle, quad, sector, ifs };

/// Geometric carrier of one piece of the measure. Every shape knows how to
/// split into self-similar (or, for annular sectors, nearly similar) children.
struct Patch {
    PatchShape shape = PatchShape::segment;
    // segment: v[0..1]; triangle: v[0..2]; quad: v[0..3] counter-clockwise;
    // sector: v[0] is the centre.
    std::array<Point, 4> v{};
    // sector: r_inner, r_outer, theta_begin, theta_end
    std::array<double, 4> sector{};
    Affine map{};                          // ifs: attractor -> cell
    const IfsAttractor* attractor = nullptr;

    Point barycenter = Point::Zero();
    double weight = 0.0;
    double diameter = 0.0;
};

inline constexpr std::size_t kMaxChildren = 16;

struct Children {
    std::array<Patch, kMaxChildren> items;
    std::size_t count = 0;

    const Patch* begin() const { return items.data(); }
    const Patch* end() const { return items.data() + count; }
};

/// Self-similar split of a patch; children weights sum to the parent weight.
void subdivide(const Patch& patch, Children& out);

/// Second central moment of the patch's normalized measure,
/// E[(x - b)(x - b)^T] with b the barycenter.
Eigen::Matrix3d covariance(const Patch& patch);

Patch make_segment(const Point& a, const Point& b, double weight);
Patch make_triangle(const Point& a, const Point& b, const Point& c);
Patch make_quad(const Point& a, const Point& b, const Point& c, const Point& d);
Patch make_sector(const Point& center, double r_inner, double r_outer, double theta_begin,
                  double theta_end);
Patch make_ifs_patch(const IfsAttractor& attractor, const Affine& map, double weight);

struct QuadratureCell {
    std::string id;           // element index or IFS address
    Patch patch;
    Point normal = Point::Zero();  // outward unit normal for boundary cells, zero otherwise

    const Point& barycenter() const { return patch.barycenter; }
    double weight() const { return patch.weight; }
    double diameter() const { return patch.diameter; }
};

// ---------------------------------------------------------------------------
// Obstacles and meshes
// ---------------------------------------------------------------------------

struct CircleBoundary { double radius = 1.0; Point center = Point::Zero(); };
struct PolygonBoundary { std::vector<Point> vertices; };
struct SphereBoundary { double radius = 1.0; int refinement = 0; Point center = Point::Zero(); };
struct SegmentScreen { Point a = Point::Zero(); Point b = Point::UnitX(); };
struct VeeScreen { Point apex = Point::Zero(); Point arm1 = Point::UnitX(); Point arm2 = Point::UnitY(); };
struct DiscVolume { double radius = 1.0; Point center = Point::Zero(); };
struct SquareVolume { double side = 1.0; Point corner = Point::Zero(); };
struct IfsAttractorSpec { IFSSystem ifs; int level = 0; };

using ObstacleVariant = std::variant<CircleBoundary, PolygonBoundary, SphereBoundary, SegmentScreen,
                                     VeeScreen, DiscVolume, SquareVolume, IfsAttractorSpec>;

struct ObstacleSpec {
    int ambient_dim = 2;
    ObstacleVariant variant;

    /// Hausdorff dimension implied by the variant (Moran solution for IFS).
    double hausdorff_dim() const;
    /// True for boundaries of bounded domains (circle, polygon, sphere).
    bool is_closed_boundary() const;
    std::string kind_name() const;
};

/// Checks ambient dimension against the variant and n-2 < d <= n.
void validate(const ObstacleSpec& spec);

struct Mesh {
    std::vector<QuadratureCell> cells;
    int ambient_dim = 2;
    double hausdorff_dim = 1.0;
    double total_measure = 0.0;
    double bounding_radius = 0.0;
    bool closed_boundary = false;
    /// True when the measure is the normalized self-similar probability measure.
    bool probability_measure = false;
    std::shared_ptr<const IfsAttractor> attractor;

    std::size_t size() const { return cells.size(); }
    std::uint64_t fingerprint() const;
};

/// Quadrature mesh for a non-IFS variant with roughly `target_cells` cells.
Mesh mesh_shape(const ObstacleSpec& spec, std::size_t target_cells);

/// All M^level cells of an IFS attractor (probability measure, total mass 1).
Mesh ifs_refine(const IFSSystem& ifs, int level, int ambient_dim = 2);

/// Dispatch: IFS variants use ifs_refine with their level, others mesh_shape.
Mesh build_mesh(const ObstacleSpec& spec, std::size_t target_cells);

/// Concatenation of meshes of pairwise disjoint components.
Mesh mesh_union(const std::vector<Mesh>& parts);

/// max over cells of |barycenter| + diameter/2.
double bounding_radius(const Mesh& mesh);

/// A point of the kernel of the obstacle O, or nullopt if O is not star-shaped.
std::optional<Point> star_center(const ObstacleSpec& spec);

/// Point-in-O test used to certify star_center.
bool contains(const ObstacleSpec& spec, const Point& x, double tol = 1e-12);

/// Plain-text cell table: `id x y [z] weight diameter` per line.
std::string mesh_table(const Mesh& mesh);

}  // namespace kbie
