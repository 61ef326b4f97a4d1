#include "rodopt/mesh.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace rodopt {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

ElementGeometry compute_geometry(const Point& a, const Point& b, const Point& c) {
    ElementGeometry g;
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    g.area = 0.5 * det;
    // grad(lambda_i) = rot90(opposite edge) / det
    g.grad_shape[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
    g.grad_shape[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
    g.grad_shape[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
    g.centroid = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    return g;
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> elements)
    : nodes_(std::move(nodes)), elements_(std::move(elements)) {
    const auto n = static_cast<int>(nodes_.size());
    geometry_.reserve(elements_.size());
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& t = elements_[e];
        for (int v : t) {
            if (v < 0 || v >= n) {
                throw UsageError("element " + std::to_string(e) + " references node " +
                                 std::to_string(v) + " out of range");
            }
        }
        auto g = compute_geometry(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
        if (!(g.area > 0.0)) {
            throw UsageError("element " + std::to_string(e) + " has non-positive area");
        }
        total_area_ += g.area;
        for (int k = 0; k < 3; ++k) {
            const int i = t[k];
            const int j = t[(k + 1) % 3];
            ++edge_count[{std::min(i, j), std::max(i, j)}];
            h_max_ = std::max(h_max_, distance(nodes_[i], nodes_[j]));
        }
        geometry_.push_back(g);
    }

    boundary_flags_.assign(nodes_.size(), 0);
    for (const auto& [edge, count] : edge_count) {
        if (count > 2) {
            throw UsageError("non-manifold edge shared by more than two elements");
        }
        if (count == 1) {
            boundary_flags_[edge.first] = 1;
            boundary_flags_[edge.second] = 1;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (boundary_flags_[i]) boundary_nodes_.push_back(i);
    }
}

Mesh Mesh::translated(double dx, double dy) const {
    auto moved = nodes_;
    for (auto& p : moved) {
        p.x += dx;
        p.y += dy;
    }
    return Mesh(std::move(moved), elements_);
}

Mesh Mesh::scaled(double sx, double sy) const {
    if (!(sx > 0.0) || !(sy > 0.0)) throw ConfigError("scale factors must be positive");
    auto moved = nodes_;
    for (auto& p : moved) {
        p.x *= sx;
        p.y *= sy;
    }
    return Mesh(std::move(moved), elements_);
}

Mesh generate_disk_mesh(double radius, std::size_t target_elements, Point center) {
    if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
    if (target_elements < 16) throw ConfigError("target_elements must be at least 16");

    const auto rings = std::max<int>(
        1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(target_elements) / 6.0))));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double golden_angle = std::numbers::pi * (3.0 - 2.2360679774997896964);

    std::vector<Point> nodes;
    nodes.reserve(1 + 3 * static_cast<std::size_t>(rings) * (rings + 1));
    std::vector<Triangle> elements;
    elements.reserve(6 * static_cast<std::size_t>(rings) * rings);
    nodes.push_back(center);

    std::vector<int> ring_start(rings + 1, 0);
    std::vector<double> ring_offset(rings + 1, 0.0);
    for (int k = 1; k <= rings; ++k) {
        ring_start[k] = static_cast<int>(nodes.size());
        ring_offset[k] = std::fmod(golden_angle * (k - 1), two_pi);
        const double rk = radius * static_cast<double>(k) / rings;
        const int count = 6 * k;
        for (int j = 0; j < count; ++j) {
            const double theta = ring_offset[k] + two_pi * j / count;
            nodes.push_back({center.x + rk * std::cos(theta), center.y + rk * std::sin(theta)});
        }
    }

    auto add_oriented = [&](int a, int b, int c) {
        const auto g = compute_geometry(nodes[a], nodes[b], nodes[c]);
        if (g.area < 0.0) std::swap(b, c);
        elements.push_back({a, b, c});
    };

    for (int j = 0; j < 6; ++j) {
        add_oriented(0, ring_start[1] + j, ring_start[1] + (j + 1) % 6);
    }

    struct RingNode {
        double angle;
        bool outer;
        int index;
    };
    std::vector<RingNode> merged;
    for (int k = 2; k <= rings; ++k) {
        merged.clear();
        for (int ring : {k - 1, k}) {
            const int count = 6 * ring;
            for (int j = 0; j < count; ++j) {
                double theta = std::fmod(ring_offset[ring] + two_pi * j / count, two_pi);
                if (theta < 0.0) theta += two_pi;
                merged.push_back({theta, ring == k, ring_start[ring] + j});
            }
        }
        std::stable_sort(merged.begin(), merged.end(),
                         [](const RingNode& a, const RingNode& b) { return a.angle < b.angle; });
        // Zip around the annulus starting from the last node of each ring.
        int last_inner = -1;
        int last_outer = -1;
        for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
            if (it->outer && last_outer < 0) last_outer = it->index;
            if (!it->outer && last_inner < 0) last_inner = it->index;
        }
        for (const auto& item : merged) {
            add_oriented(last_inner, last_outer, item.index);
            (item.outer ? last_outer : last_inner) = item.index;
        }
    }

    // Snap the outer ring onto the circle exactly.
    const double outer_r = radius;
    for (int j = 0; j < 6 * rings; ++j) {
        auto& p = nodes[ring_start[rings] + j];
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        const double s = outer_r / std::hypot(dx, dy);
        p = {center.x + dx * s, center.y + dy * s};
    }
    return Mesh(std::move(nodes), std::move(elements));
}

Mesh generate_ellipse_mesh(double a, double b, std::size_t target_elements) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("ellipse semi-axes must be positive");
    return generate_disk_mesh(1.0, target_elements).scaled(a, b);
}

Mesh generate_rectangle_mesh(Point lower, Point upper, std::size_t nx, std::size_t ny) {
    if (nx == 0 || ny == 0) throw ConfigError("rectangle mesh needs at least one cell per axis");
    if (!(upper.x > lower.x) || !(upper.y > lower.y)) {
        throw ConfigError("rectangle corners must satisfy lower < upper");
    }
    std::vector<Point> nodes;
    nodes.reserve((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        for (std::size_t i = 0; i <= nx; ++i) {
            nodes.push_back({lower.x + (upper.x - lower.x) * static_cast<double>(i) / nx,
                             lower.y + (upper.y - lower.y) * static_cast<double>(j) / ny});
        }
    }
    std::vector<Triangle> elements;
    elements.reserve(2 * nx * ny);
    const auto id = [nx](std::size_t i, std::size_t j) { return static_cast<int>(j * (nx + 1) + i); };
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh(std::move(nodes), std::move(elements));
}

const ElementGeometry& element_geometry(const Mesh& mesh, std::size_t elem) {
    if (elem >= mesh.num_elements()) {
        throw UsageError("element index " + std::to_string(elem) + " out of range");
    }
    return mesh.geometry(elem);
}

std::span<const QuadraturePoint> quadrature_points(int order) {
    static const QuadraturePoint centroid[] = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0}};
    static const QuadraturePoint midpoints[] = {
        {{0.5, 0.5, 0.0}, 1.0 / 3.0},
        {{0.0, 0.5, 0.5}, 1.0 / 3.0},
        {{0.5, 0.0, 0.5}, 1.0 / 3.0},
    };
    // Strang-Fix / Dunavant degree-4 rule.
    constexpr double a1 = 0.445948490915965;
    constexpr double b1 = 1.0 - 2.0 * a1;
    constexpr double w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771;
    constexpr double b2 = 1.0 - 2.0 * a2;
    constexpr double w2 = 0.109951743655322;
    static const QuadraturePoint degree4[] = {
        {{a1, a1, b1}, w1}, {{a1, b1, a1}, w1}, {{b1, a1, a1}, w1},
        {{a2, a2, b2}, w2}, {{a2, b2, a2}, w2}, {{b2, a2, a2}, w2},
    };
    switch (order) {
        case 1: return centroid;
        case 2: return midpoints;
        case 4: return degree4;
        default: throw UsageError("unsupported quadrature order " + std::to_string(order));
    }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out.precision(17);
    out << "nodes " << mesh.num_nodes() << " elements " << mesh.num_elements() << '\n';
    for (const auto& p : mesh.nodes()) out << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.elements()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    const auto& b = mesh.boundary_nodes();
    for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i];
    out << '\n';
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_mesh(mesh, out);
    if (!out) throw IoError("failed writing " + path.string());
}

Mesh read_mesh(std::istream& in) {
    std::string tag_nodes;
    std::string tag_elements;
    std::size_t n = 0;
    std::size_t m = 0;
    if (!(in >> tag_nodes >> n >> tag_elements >> m) || tag_nodes != "nodes" ||
        tag_elements != "elements") {
        throw IoError("mesh header must read 'nodes N elements M'");
    }
    std::vector<Point> nodes(n);
    for (auto& p : nodes) {
        if (!(in >> p.x >> p.y)) throw IoError("truncated node block");
    }
    std::vector<Triangle> elements(m);
    for (auto& t : elements) {
        if (!(in >> t[0] >> t[1] >> t[2])) throw IoError("truncated element block");
    }
    std::string rest;
    std::getline(in, rest);  // finish the last element line
    std::getline(in, rest);
    std::vector<int> listed;
    std::istringstream line(rest);
    for (int b; line >> b;) listed.push_back(b);

    Mesh mesh(std::move(nodes), std::move(elements));
    std::sort(listed.begin(), listed.end());
    if (listed != mesh.boundary_nodes()) {
        throw IoError("listed boundary nodes disagree with mesh topology");
    }
    return mesh;
}

Mesh read_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_mesh(in);
}

}  // namespace rodopt
