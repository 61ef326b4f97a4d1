#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace rodopt {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<int, 3>;

/// Constant per-element data of a P1 triangle.
struct ElementGeometry {
    double area = 0.0;
    std::array<Point, 3> grad_shape{};  // gradients of the barycentric shape functions
    Point centroid{};
};

/// Conforming P1 triangulation with boundary-node flags.
///
/// Immutable after construction. The constructor checks that every element is
/// positively oriented and derives the boundary from edges with a single
/// adjacent element.
class Mesh {
public:
    Mesh() = default;
    Mesh(std::vector<Point> nodes, std::vector<Triangle> elements);

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_elements() const noexcept { return elements_.size(); }

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<Triangle>& elements() const noexcept { return elements_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const Triangle& element(std::size_t e) const { return elements_[e]; }

    /// Sorted indices of nodes on the domain boundary.
    const std::vector<int>& boundary_nodes() const noexcept { return boundary_nodes_; }
    bool is_boundary(std::size_t node) const { return boundary_flags_[node] != 0; }
    const std::vector<char>& boundary_flags() const noexcept { return boundary_flags_; }

    const ElementGeometry& geometry(std::size_t e) const { return geometry_[e]; }
    const std::vector<ElementGeometry>& geometries() const noexcept { return geometry_; }

    double h_max() const noexcept { return h_max_; }
    double total_area() const noexcept { return total_area_; }

    /// Rigidly shifted copy with identical connectivity.
    Mesh translated(double dx, double dy) const;
    /// Copy with coordinates scaled independently along both axes.
    Mesh scaled(double sx, double sy) const;

private:
    std::vector<Point> nodes_;
    std::vector<Triangle> elements_;
    std::vector<int> boundary_nodes_;
    std::vector<char> boundary_flags_;
    std::vector<ElementGeometry> geometry_;
    double h_max_ = 0.0;
    double total_area_ = 0.0;
};

/// Concentric-ring triangulation of the disk of the given radius centred at
/// `center`.
///
/// Ring k (k = 1..R) holds 6k nodes at radius k*radius/R, so the mesh has
/// 6R^2 triangles; R is chosen to bring the element count closest to
/// `target_elements`. Each ring is rotated by a golden-angle multiple so the
/// triangulation carries no exact rotational symmetry.
Mesh generate_disk_mesh(double radius, std::size_t target_elements, Point center = {});

/// Disk mesh mapped affinely onto the ellipse with semi-axes a (x) and b (y).
Mesh generate_ellipse_mesh(double a, double b, std::size_t target_elements);

/// Structured nx-by-ny rectangle grid, each cell split along a diagonal.
Mesh generate_rectangle_mesh(Point lower, Point upper, std::size_t nx, std::size_t ny);

/// Per-element geometry with bounds checking.
const ElementGeometry& element_geometry(const Mesh& mesh, std::size_t elem);

/// Geometry computed directly from three vertices (may have negative area for
/// clockwise input).
ElementGeometry compute_geometry(const Point& a, const Point& b, const Point& c);

struct QuadraturePoint {
    std::array<double, 3> bary;
    double weight;  // fraction of the element area; weights sum to 1
};

/// Triangle rules: order 1 (centroid), 2 (edge midpoints) and 4 (6-point,
/// exact to degree 4).
std::span<const QuadraturePoint> quadrature_points(int order);

/// Plain-text mesh dump: "nodes N elements M", N coordinate lines, M index
/// lines (0-based), then one line of boundary node indices.
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace rodopt
