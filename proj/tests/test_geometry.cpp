#include "kbie/error.hpp"
#include "kbie/geometry.hpp"
#include "kbie/special.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace kbie;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = special::pi;

IFSSystem cantor() {
    IFSSystem s;
    s.maps = {{1.0 / 3.0, 0.0, Point::Zero()}, {1.0 / 3.0, 0.0, Point(2.0 / 3.0, 0.0, 0.0)}};
    return s;
}

IFSSystem sierpinski() {
    IFSSystem s;
    s.maps = {{0.5, 0.0, Point::Zero()}, {0.5, 0.0, Point(0.5, 0.0, 0.0)}, {0.5, 0.0, Point(0.25, std::sqrt(3.0) / 4.0, 0.0)}};
    return s;
}

double weight_sum(const Mesh& m) {
    double s = 0.0;
    for (const auto& c : m.cells) s += c.weight();
    return s;
}

std::vector<double> sorted_x(const Mesh& m) {
    std::vector<double> xs;
    for (const auto& c : m.cells) xs.push_back(c.barycenter().x());
    std::sort(xs.begin(), xs.end());
    return xs;
}

std::vector<ObstacleSpec> all_variants() {
    return {
        {2, CircleBoundary{1.0, Point::Zero()}},
        {2, PolygonBoundary{{Point(0, 0, 0), Point(2, 0, 0), Point(2, 1, 0), Point(0, 1, 0)}}},
        {3, SphereBoundary{1.0, 0, Point::Zero()}},
        {2, SegmentScreen{Point::Zero(), Point(1, 1, 0)}},
        {2, VeeScreen{Point::Zero(), Point(1, 0, 0), Point(0, 1, 0)}},
        {2, DiscVolume{1.0, Point::Zero()}},
        {2, SquareVolume{1.0, Point::Zero()}},
        {2, IfsAttractorSpec{cantor(), 3}},
        {2, IfsAttractorSpec{sierpinski(), 2}},
    };
}

}  // namespace

TEST_CASE("moran_dimension") {
    CHECK_THAT(moran_dimension({1.0 / 3.0, 1.0 / 3.0}), WithinAbs(std::log(2.0) / std::log(3.0), 1e-13));
    CHECK_THAT(moran_dimension({0.5, 0.5}), WithinAbs(1.0, 1e-13));
    CHECK_THAT(moran_dimension({0.5, 0.5, 0.5}), WithinAbs(std::log(3.0) / std::log(2.0), 1e-13));
    CHECK_THAT(moran_dimension({0.6309}), WithinAbs(0.0, 1e-13));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> r(1 + t % 6);
        for (double& x : r) x = u(rng);
        const double d = moran_dimension(r);
        double s = 0.0;
        for (double x : r) s += std::pow(x, d);
        if (r.size() > 1) CHECK_THAT(s, WithinAbs(1.0, 1e-12));
    }

    CHECK_THROWS_AS(moran_dimension({}), DomainError);
    CHECK_THROWS_AS(moran_dimension({0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(moran_dimension({0.0}), DomainError);
}

TEST_CASE("ifs_refine cell tables") {
    const Mesh l1 = ifs_refine(cantor(), 1);
    REQUIRE(l1.size() == 2);
    for (const auto& c : l1.cells) CHECK_THAT(c.weight(), WithinAbs(0.5, 1e-15));
    auto x1 = sorted_x(l1);
    CHECK_THAT(x1[0], WithinAbs(1.0 / 6.0, 1e-14));
    CHECK_THAT(x1[1], WithinAbs(5.0 / 6.0, 1e-14));

    const Mesh l2 = ifs_refine(cantor(), 2);
    REQUIRE(l2.size() == 4);
    auto x2 = sorted_x(l2);
    const double expect[] = {1.0 / 18.0, 5.0 / 18.0, 13.0 / 18.0, 17.0 / 18.0};
    for (int i = 0; i < 4; ++i) {
        CHECK_THAT(x2[i], WithinAbs(expect[i], 1e-14));
        CHECK_THAT(l2.cells[i].weight(), WithinAbs(0.25, 1e-15));
    }
    CHECK(l2.probability_measure);
    CHECK_THAT(l2.hausdorff_dim, WithinAbs(std::log(2.0) / std::log(3.0), 1e-13));

    const Mesh s3 = ifs_refine(sierpinski(), 3);
    REQUIRE(s3.size() == 27);
    double dmax = 0.0;
    for (const auto& c : s3.cells) {
        CHECK_THAT(c.weight(), WithinAbs(1.0 / 27.0, 1e-15));
        dmax = std::max(dmax, c.diameter());
    }
    CHECK_THAT(dmax, WithinRel(0.125 * 1.0, 1e-12));  // attractor diameter is the unit side

    const Mesh l0 = ifs_refine(cantor(), 0);
    CHECK(l0.size() == 1);
    CHECK_THAT(l0.cells[0].weight(), WithinAbs(1.0, 1e-15));

    CHECK_THROWS_AS(ifs_refine(cantor(), 21), ResourceError);
    CHECK_THROWS_AS(ifs_refine(cantor(), -1), DomainError);
}

TEST_CASE("mesh_shape examples") {
    const Mesh circle = mesh_shape({2, CircleBoundary{1.0, Point::Zero()}}, 8);
    REQUIRE(circle.size() == 8);
    CHECK_THAT(circle.total_measure, WithinRel(2.0 * pi, 1e-14));
    std::vector<double> angles;
    for (const auto& c : circle.cells) {
        CHECK_THAT(c.weight(), WithinRel(2.0 * pi / 8.0, 1e-14));
        CHECK_THAT(c.barycenter().norm(), WithinRel(std::cos(pi / 8.0), 1e-14));
        double a = std::atan2(c.barycenter().y(), c.barycenter().x());
        if (a < 0) a += 2.0 * pi;
        angles.push_back(a);
        CHECK_THAT(c.normal.dot(c.barycenter().normalized()), WithinAbs(1.0, 1e-14));
    }
    std::sort(angles.begin(), angles.end());
    for (int j = 0; j < 8; ++j) CHECK_THAT(angles[j], WithinAbs(pi / 8.0 + j * pi / 4.0, 1e-13));
    CHECK(circle.closed_boundary);

    const Mesh seg = mesh_shape({2, SegmentScreen{Point::Zero(), Point::UnitX()}}, 4);
    REQUIRE(seg.size() == 4);
    auto xs = sorted_x(seg);
    for (int i = 0; i < 4; ++i) {
        CHECK_THAT(xs[i], WithinAbs((2 * i + 1) / 8.0, 1e-15));
        CHECK_THAT(seg.cells[i].weight(), WithinAbs(0.25, 1e-15));
    }
    CHECK_FALSE(seg.closed_boundary);

    const Mesh sq = mesh_shape({2, SquareVolume{1.0, Point::Zero()}}, 16);
    REQUIRE(sq.size() == 16);
    for (const auto& c : sq.cells) CHECK_THAT(c.weight(), WithinAbs(1.0 / 16.0, 1e-15));
    CHECK_THAT(sq.total_measure, WithinAbs(1.0, 1e-14));
    CHECK(sq.hausdorff_dim == 2.0);

    const Mesh disc = mesh_shape({2, DiscVolume{1.0, Point::Zero()}}, 200);
    CHECK_THAT(weight_sum(disc), WithinRel(pi, 1e-12));

    const Mesh sphere = mesh_shape({3, SphereBoundary{1.0, 0, Point::Zero()}}, 500);
    CHECK(sphere.size() >= 500);
    CHECK(sphere.hausdorff_dim == 2.0);
    CHECK_THAT(weight_sum(sphere), WithinRel(4.0 * pi, 0.02));

    CHECK_THROWS_AS(mesh_shape({2, CircleBoundary{}}, 3), DomainError);
}

TEST_CASE("geometry validation") {
    const std::vector<Point> dup = {Point(0, 0, 0), Point(1, 0, 0), Point(1, 0, 0), Point(0, 1, 0)};
    CHECK_THROWS_AS(mesh_shape({2, PolygonBoundary{dup}}, 16), GeometryError);
    const std::vector<Point> bowtie = {Point(0, 0, 0), Point(1, 1, 0), Point(1, 0, 0), Point(0, 1, 0)};
    CHECK_THROWS_AS(mesh_shape({2, PolygonBoundary{bowtie}}, 16), GeometryError);
    CHECK_THROWS_AS(validate({2, SegmentScreen{Point::Zero(), Point::Zero()}}), GeometryError);
    CHECK_THROWS_AS(validate({2, SphereBoundary{}}), DomainError);
    CHECK_THROWS_AS(validate({2, CircleBoundary{-1.0, Point::Zero()}}), DomainError);
    CHECK_THROWS_AS(validate({4, CircleBoundary{}}), DomainError);
    // The Cantor dust has d < 1 = n - 2 in three dimensions.
    CHECK_THROWS_AS(validate({3, IfsAttractorSpec{cantor(), 2}}), ModelError);
    CHECK_NOTHROW(validate({3, SphereBoundary{}}));

    ObstacleSpec c{2, CircleBoundary{}};
    CHECK(c.hausdorff_dim() == 1.0);
    CHECK(c.is_closed_boundary());
    ObstacleSpec d{2, DiscVolume{}};
    CHECK(d.hausdorff_dim() == 2.0);
    CHECK_FALSE(d.is_closed_boundary());
    ObstacleSpec f{2, IfsAttractorSpec{cantor(), 2}};
    CHECK_THAT(f.hausdorff_dim(), WithinAbs(std::log(2.0) / std::log(3.0), 1e-13));
}

TEST_CASE("measure conservation under refinement") {
    for (const auto& spec : all_variants()) {
        INFO(spec.kind_name());
        const Mesh m = build_mesh(spec, 64);
        CHECK_THAT(weight_sum(m), WithinRel(m.total_measure, 1e-12));
        double refined = 0.0;
        Children kids;
        for (const auto& c : m.cells) {
            CHECK(c.weight() > 0.0);
            CHECK(c.diameter() > 0.0);
            subdivide(c.patch, kids);
            REQUIRE(kids.count >= 2);
            double s = 0.0;
            for (const Patch& p : kids) {
                CHECK(p.weight > 0.0);
                CHECK(p.diameter > 0.0);
                CHECK(p.diameter <= c.diameter() * (1.0 + 1e-12));
                s += p.weight;
            }
            CHECK_THAT(s, WithinRel(c.weight(), 1e-12));
            refined += s;
        }
        CHECK_THAT(refined, WithinRel(m.total_measure, 1e-12));
    }
}

TEST_CASE("Cantor mesh is a d-set at mesh scale") {
    const int level = 7;
    const Mesh m = ifs_refine(cantor(), level);
    const double d = m.hausdorff_dim;
    for (int j = 1; j <= level - 2; ++j) {
        const double r = std::pow(3.0, -j);
        for (const auto& c : m.cells) {
            double mass = 0.0;
            for (const auto& o : m.cells)
                if ((o.barycenter() - c.barycenter()).norm() <= r) mass += o.weight();
            CHECK(mass >= 0.2 * std::pow(r, d));
            CHECK(mass <= 5.0 * std::pow(r, d));
        }
    }
}

TEST_CASE("star_center") {
    const ObstacleSpec square{2, PolygonBoundary{{Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)}}};
    auto s = star_center(square);
    REQUIRE(s);
    CHECK_THAT(s->x(), WithinAbs(0.5, 1e-12));
    CHECK_THAT(s->y(), WithinAbs(0.5, 1e-12));

    auto o = star_center({2, DiscVolume{1.0, Point::Zero()}});
    REQUIRE(o);
    CHECK(o->norm() < 1e-15);

    const ObstacleSpec u{2, PolygonBoundary{{Point(0, 0, 0), Point(3, 0, 0), Point(3, 3, 0), Point(2, 3, 0),
                                             Point(2, 1, 0), Point(1, 1, 0), Point(1, 3, 0), Point(0, 3, 0)}}};
    CHECK_FALSE(star_center(u));

    // An L-shape is star-shaped but not convex; its kernel is the corner square.
    const ObstacleSpec ell{2, PolygonBoundary{{Point(0, 0, 0), Point(2, 0, 0), Point(2, 1, 0), Point(1, 1, 0),
                                               Point(1, 2, 0), Point(0, 2, 0)}}};
    auto e = star_center(ell);
    REQUIRE(e);
    CHECK(e->x() <= 1.0 + 1e-12);
    CHECK(e->y() <= 1.0 + 1e-12);

    CHECK_THROWS_AS(star_center({2, SegmentScreen{}}), UnsupportedQuery);
    CHECK_THROWS_AS(star_center({2, IfsAttractorSpec{cantor(), 2}}), UnsupportedQuery);
}

TEST_CASE("star_center certifies visibility") {
    const std::vector<ObstacleSpec> specs = {
        {2, PolygonBoundary{{Point(0, 0, 0), Point(2, 0, 0), Point(2, 1, 0), Point(1, 1, 0), Point(1, 2, 0), Point(0, 2, 0)}}},
        {2, PolygonBoundary{{Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)}}},
        {2, DiscVolume{1.0, Point(0.3, -0.2, 0.0)}},
        {2, SquareVolume{2.0, Point(-1.0, 0.5, 0.0)}},
        {2, CircleBoundary{1.5, Point(1.0, 1.0, 0.0)}},
        {3, SphereBoundary{1.0, 0, Point::Zero()}},
    };
    std::mt19937_64 rng(17);
    for (const auto& spec : specs) {
        INFO(spec.kind_name());
        const auto x = star_center(spec);
        REQUIRE(x);
        const Mesh m = build_mesh(spec, 100);
        std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
        for (int t = 0; t < 1000; ++t) {
            const Point y = m.cells[pick(rng)].barycenter();
            for (int s = 0; s <= 19; ++s) {
                const double a = s / 19.0;
                const bool inside = contains(spec, (1.0 - a) * *x + a * y, 1e-9);
                if (!inside) FAIL("segment leaves the obstacle");
            }
        }
    }
}

TEST_CASE("bounding_radius") {
    const Mesh circle = build_mesh({2, CircleBoundary{1.0, Point::Zero()}}, 64);
    double hmax = 0.0;
    for (const auto& c : circle.cells) hmax = std::max(hmax, c.diameter());
    CHECK(bounding_radius(circle) >= 1.0);
    CHECK(bounding_radius(circle) <= 1.0 + hmax / 2.0 + 1e-14);
    CHECK(circle.bounding_radius == bounding_radius(circle));

    for (int level : {3, 5}) {
        const Mesh c = ifs_refine(cantor(), level);
        CHECK(bounding_radius(c) >= 1.0 - 1e-14);
        CHECK(bounding_radius(c) <= 1.0 + std::pow(3.0, -level) / 2.0 + 1e-14);
    }

    const Mesh disc = build_mesh({2, DiscVolume{1.0, Point(2.0, 0.0, 0.0)}}, 300);
    hmax = 0.0;
    for (const auto& c : disc.cells) hmax = std::max(hmax, c.diameter());
    CHECK(bounding_radius(disc) >= 3.0);
    CHECK(bounding_radius(disc) <= 3.0 + hmax / 2.0 + 1e-12);
}

TEST_CASE("mesh_union") {
    const Mesh a = build_mesh({2, SegmentScreen{Point(0, 0, 0), Point(1, 0, 0)}}, 8);
    const Mesh b = build_mesh({2, SegmentScreen{Point(0, 2, 0), Point(1, 2, 0)}}, 8);
    const Mesh u = mesh_union({a, b});
    CHECK(u.size() == 16);
    CHECK_THAT(u.total_measure, WithinRel(2.0, 1e-14));
    CHECK_THROWS_AS(mesh_union({a, a}), GeometryError);
    CHECK_THROWS_AS(mesh_union({}), DomainError);
    const Mesh disc = build_mesh({2, DiscVolume{0.2, Point(5, 5, 0)}}, 16);
    CHECK_THROWS_AS(mesh_union({a, disc}), GeometryError);
}

TEST_CASE("mesh table and fingerprint") {
    const Mesh m = build_mesh({2, SegmentScreen{Point::Zero(), Point::UnitX()}}, 4);
    std::istringstream in(mesh_table(m));
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string id;
        double x, y, w, h;
        REQUIRE(ls >> id >> x >> y >> w >> h);
        CHECK_THAT(w, WithinAbs(0.25, 1e-12));
        ++rows;
    }
    CHECK(rows == 4);

    const Mesh same = build_mesh({2, SegmentScreen{Point::Zero(), Point::UnitX()}}, 4);
    const Mesh other = build_mesh({2, SegmentScreen{Point::Zero(), Point::UnitX()}}, 8);
    CHECK(m.fingerprint() == same.fingerprint());
    CHECK(m.fingerprint() != other.fingerprint());

    const Mesh s = build_mesh({3, SphereBoundary{1.0, 0, Point::Zero()}}, 20);
    std::istringstream in3(mesh_table(s));
    while (std::getline(in3, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string id;
        double x, y, z, w, h;
        CHECK(static_cast<bool>(ls >> id >> x >> y >> z >> w >> h));
    }
}

TEST_CASE("patch covariance obeys the law of total covariance") {
    IFSSystem twisted;
    twisted.maps = {{0.4, pi / 2.0, Point::Zero()}, {0.35, 0.3, Point(1.0, 0.0, 0.0)}, {0.3, 0.0, Point(0.2, 0.8, 0.0)}};
    const auto attractor = make_attractor(twisted);
    const std::vector<Patch> patches = {
        make_segment(Point(0, 0, 0), Point(2, 1, 0), 3.0),
        make_triangle(Point(0, 0, 0), Point(2, 0.3, 0), Point(0.4, 1.5, 0.7)),
        make_quad(Point(0, 0, 0), Point(2, 0, 0), Point(1.7, 1.2, 0), Point(0.2, 0.9, 0)),
        make_sector(Point(0.5, 0.5, 0), 0.2, 1.0, 0.3, 1.9),
        make_ifs_patch(*attractor, Affine{}, 1.0),
    };
    for (const Patch& p : patches) {
        const Eigen::Matrix3d c = covariance(p);
        Children kids;
        subdivide(p, kids);
        Eigen::Matrix3d total = Eigen::Matrix3d::Zero();
        for (const Patch& q : kids) {
            const Point d = q.barycenter - p.barycenter;
            total += q.weight / p.weight * (covariance(q) + d * d.transpose());
        }
        CHECK((total - c).norm() <= 1e-12 * c.norm());
        CHECK(c.trace() > 0.0);
    }
    // Unit segment: variance 1/12 along the segment.
    CHECK_THAT(covariance(make_segment(Point::Zero(), Point::UnitX(), 1.0))(0, 0), WithinAbs(1.0 / 12.0, 1e-15));
}
