#include "rodopt/errors.hpp"
#include "rodopt/mesh.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

using namespace rodopt;

namespace {

std::map<std::pair<int, int>, int> edge_counts(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : mesh.elements()) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    }
    return count;
}

double area_sum(const Mesh& mesh) {
    double s = 0.0;
    for (const auto& t : mesh.elements()) s += oracle::triangle_area(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2]));
    return s;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("disk mesh hits the element target and the circle") {
    for (std::size_t target : {64u, 2000u, 20000u}) {
        const auto mesh = generate_disk_mesh(0.7, target);
        const double ratio = static_cast<double>(mesh.num_elements()) / static_cast<double>(target);
        CHECK(ratio > 0.8);
        CHECK(ratio < 1.2);
        for (int b : mesh.boundary_nodes()) {
            const auto& p = mesh.node(b);
            CHECK(std::abs(std::hypot(p.x, p.y) - 0.7) <= 1e-12);
        }
        for (const auto& p : mesh.nodes()) CHECK(std::hypot(p.x, p.y) <= 0.7 + 1e-12);
    }
}

TEST_CASE("paper-scale disk mesh element count") {
    const auto mesh = generate_disk_mesh(0.7, 160000);
    CHECK(std::abs(static_cast<double>(mesh.num_elements()) / 1.6e5 - 1.0) < 0.2);
}

TEST_CASE("unit disk coarse mesh stays inside the disk") {
    const auto mesh = generate_disk_mesh(1.0, 64);
    for (const auto& p : mesh.nodes()) CHECK(std::hypot(p.x, p.y) <= 1.0 + 1e-12);
}

TEST_CASE("disk area converges at second order") {
    const double exact = std::numbers::pi * 0.49;
    double previous = 0.0;
    for (std::size_t target : {600u, 2400u, 9600u}) {
        const auto mesh = generate_disk_mesh(0.7, target);
        const double err = std::abs(area_sum(mesh) - exact) / exact;
        CHECK(err <= 2.0 * mesh.h_max() * mesh.h_max());
        CHECK(mesh.total_area() == doctest::Approx(area_sum(mesh)).epsilon(1e-13));
        if (previous > 0.0) CHECK(err < 0.35 * previous);
        previous = err;
    }
}

TEST_CASE("every element is positively oriented") {
    const auto mesh = generate_disk_mesh(0.7, 3000, {0.2, -0.1});
    for (const auto& t : mesh.elements()) {
        CHECK(oracle::triangle_area(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2])) > 0.0);
    }
}

TEST_CASE("interior edges have two elements, boundary edges one") {
    for (const auto& mesh : {generate_disk_mesh(0.7, 2000), generate_rectangle_mesh({0, 0}, {2, 1}, 7, 5)}) {
        std::size_t boundary_edges = 0;
        for (const auto& [edge, n] : edge_counts(mesh)) {
            CHECK((n == 1 || n == 2));
            if (n == 1) {
                ++boundary_edges;
                CHECK(mesh.is_boundary(edge.first));
                CHECK(mesh.is_boundary(edge.second));
            }
        }
        // A closed boundary polygon has as many edges as nodes.
        CHECK(boundary_edges == mesh.boundary_nodes().size());
    }
}

TEST_CASE("element geometry of the unit right triangle") {
    const auto g = compute_geometry({0, 0}, {1, 0}, {0, 1});
    CHECK(g.area == doctest::Approx(0.5));
    CHECK(g.grad_shape[0].x == doctest::Approx(-1.0));
    CHECK(g.grad_shape[0].y == doctest::Approx(-1.0));
    CHECK(g.grad_shape[1].x == doctest::Approx(1.0));
    CHECK(g.grad_shape[1].y == doctest::Approx(0.0));
    CHECK(g.grad_shape[2].x == doctest::Approx(0.0));
    CHECK(g.grad_shape[2].y == doctest::Approx(1.0));
    CHECK(g.centroid.x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("shape gradients sum to zero and survive translation") {
    const auto mesh = generate_disk_mesh(0.7, 500);
    const auto moved = mesh.translated(3.5, -1.25);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& g = element_geometry(mesh, e);
        const auto& h = element_geometry(moved, e);
        double sx = 0.0, sy = 0.0;
        for (const auto& d : g.grad_shape) {
            sx += d.x;
            sy += d.y;
        }
        CHECK(std::abs(sx) < 1e-10);
        CHECK(std::abs(sy) < 1e-10);
        CHECK(h.area == doctest::Approx(g.area).epsilon(1e-10));
        for (int k = 0; k < 3; ++k) {
            CHECK(h.grad_shape[k].x == doctest::Approx(g.grad_shape[k].x).epsilon(1e-8));
            CHECK(h.grad_shape[k].y == doctest::Approx(g.grad_shape[k].y).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(element_geometry(mesh, mesh.num_elements()), UsageError);
}

TEST_CASE("gradients reproduce linear functions") {
    const auto g = compute_geometry({0.3, 0.1}, {1.2, 0.4}, {0.5, 0.9});
    const std::array<Point, 3> v{{{0.3, 0.1}, {1.2, 0.4}, {0.5, 0.9}}};
    // f(x, y) = 2x - 3y has gradient (2, -3).
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double f = 2.0 * v[k].x - 3.0 * v[k].y;
        gx += f * g.grad_shape[k].x;
        gy += f * g.grad_shape[k].y;
    }
    CHECK(gx == doctest::Approx(2.0));
    CHECK(gy == doctest::Approx(-3.0));
}

TEST_CASE("quadrature rules are exact to their degree") {
    for (int order : {1, 2, 4}) {
        const auto rule = quadrature_points(order);
        double wsum = 0.0;
        for (const auto& q : rule) wsum += q.weight;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        const int degree = order == 1 ? 1 : order;
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                for (int c = 0; a + b + c <= degree; ++c) {
                    double approx = 0.0;
                    for (const auto& q : rule) {
                        approx += q.weight * std::pow(q.bary[0], a) * std::pow(q.bary[1], b) * std::pow(q.bary[2], c);
                    }
                    // Reference area 1 so that weights act directly.
                    CHECK(approx == doctest::Approx(oracle::barycentric_monomial(1.0, a, b, c)).epsilon(1e-13));
                }
            }
        }
    }
    CHECK_THROWS_AS(quadrature_points(3), UsageError);
}

TEST_CASE("constructor rejects bad connectivity") {
    std::vector<Point> nodes{{0, 0}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(Mesh(nodes, {{0, 2, 1}}), UsageError);
    CHECK_THROWS_AS(Mesh(nodes, {{0, 1, 3}}), UsageError);
    const Mesh single(nodes, {{0, 1, 2}});
    CHECK(single.boundary_nodes().size() == 3);
}

TEST_CASE("generators reject invalid sizes") {
    CHECK_THROWS_AS(generate_disk_mesh(0.0, 100), ConfigError);
    CHECK_THROWS_AS(generate_disk_mesh(-1.0, 100), ConfigError);
    CHECK_THROWS_AS(generate_disk_mesh(0.7, 10), ConfigError);
    CHECK_THROWS_AS(generate_rectangle_mesh({0, 0}, {1, 1}, 0, 3), ConfigError);
    CHECK_THROWS_AS(generate_ellipse_mesh(1.0, -0.5, 100), ConfigError);
}

TEST_CASE("ellipse mesh boundary lies on the ellipse") {
    const auto mesh = generate_ellipse_mesh(1.0, 0.5, 4000);
    for (int b : mesh.boundary_nodes()) {
        const auto& p = mesh.node(b);
        CHECK(std::abs(p.x * p.x + 4.0 * p.y * p.y - 1.0) < 1e-12);
    }
    CHECK(mesh.total_area() == doctest::Approx(std::numbers::pi * 0.5).epsilon(5e-3));
}

TEST_CASE("text round trip preserves the mesh") {
    const auto mesh = generate_disk_mesh(0.7, 300);
    std::stringstream buffer;
    write_mesh(mesh, buffer);
    const auto back = read_mesh(buffer);
    REQUIRE(back.num_nodes() == mesh.num_nodes());
    REQUIRE(back.num_elements() == mesh.num_elements());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        CHECK(back.node(i).x == mesh.node(i).x);
        CHECK(back.node(i).y == mesh.node(i).y);
    }
    CHECK(back.boundary_nodes() == mesh.boundary_nodes());

    std::stringstream broken("nodes 3 elements 1\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(broken), IoError);
}

}  // TEST_SUITE
