#include "fibermem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fibermem/errors.hpp"

namespace fibermem {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

bool SurfaceMesh::is_planar(double tol) const {
    for (const auto& p : nodes)
        if (std::abs(p.z()) > tol) return false;
    return true;
}

void SurfaceMesh::validate() const {
    const int nn = num_nodes();
    std::set<std::pair<int, int>> directed;
    for (int e = 0; e < num_elements(); ++e) {
        const auto& el = elements[e];
        for (int a = 0; a < 4; ++a) {
            if (el[a] < 0 || el[a] >= nn)
                throw InvalidArgument("element " + std::to_string(e) + " references node " +
                                      std::to_string(el[a]) + " outside [0, " +
                                      std::to_string(nn) + ")");
            for (int b = 0; b < a; ++b)
                if (el[a] == el[b])
                    throw InvalidArgument("element " + std::to_string(e) +
                                          " repeats node " + std::to_string(el[a]));
        }
        // Consistently oriented neighbours traverse a shared edge in opposite directions.
        for (int k = 0; k < 4; ++k) {
            if (!directed.emplace(el[k], el[(k + 1) % 4]).second)
                throw InvalidArgument("inconsistent orientation at element " +
                                      std::to_string(e));
        }
        // A folded element shows Gauss-point normals opposing the centre normal.
        const Vec3 n0 = surface_point(*this, e, Vec2::Zero()).frame.n;
        for (const auto& g : gauss_points_2x2())
            if (!(surface_point(*this, e, g).frame.n.dot(n0) > 0.0))
                throw DegenerateElement(e, "isoparametric Jacobian changes sign");
    }
    for (const auto& [label, edges] : boundary_edges)
        for (const auto& [e, k] : edges)
            if (e < 0 || e >= num_elements() || k < 0 || k > 3)
                throw InvalidArgument("boundary label '" + label + "' has invalid edge");
    for (const auto& [label, set] : node_sets)
        for (int n : set)
            if (n < 0 || n >= nn)
                throw InvalidArgument("node set '" + label + "' has invalid node");
}

Mat3 TangentFrame::tangent_projector() const {
    return Mat3::Identity() - n * n.transpose();
}

Mat3 TangentFrame::normal_projector() const { return n * n.transpose(); }

ShapeEval bilinear_shape(const Vec2& q) {
    static constexpr std::array<double, 4> xs{-1.0, 1.0, 1.0, -1.0};
    static constexpr std::array<double, 4> ys{-1.0, -1.0, 1.0, 1.0};
    ShapeEval s{};
    for (int a = 0; a < 4; ++a) {
        s.N[a] = 0.25 * (1.0 + xs[a] * q.x()) * (1.0 + ys[a] * q.y());
        s.dN_dxi[a] = 0.25 * xs[a] * (1.0 + ys[a] * q.y());
        s.dN_deta[a] = 0.25 * ys[a] * (1.0 + xs[a] * q.x());
    }
    return s;
}

SurfacePoint surface_point(const SurfaceMesh& mesh, int element, const Vec2& local_coords) {
    if (element < 0 || element >= mesh.num_elements())
        throw InvalidArgument("element index " + std::to_string(element) + " out of range");
    if (std::abs(local_coords.x()) > 1.0 + 1e-12 || std::abs(local_coords.y()) > 1.0 + 1e-12)
        throw InvalidArgument("local coordinates outside the reference square");

    SurfacePoint sp;
    sp.shape = bilinear_shape(local_coords);
    const auto& el = mesh.elements[element];
    Vec3 x = Vec3::Zero(), x_xi = Vec3::Zero(), x_eta = Vec3::Zero();
    for (int a = 0; a < 4; ++a) {
        const Vec3& X = mesh.nodes[el[a]];
        x += sp.shape.N[a] * X;
        x_xi += sp.shape.dN_dxi[a] * X;
        x_eta += sp.shape.dN_deta[a] * X;
    }
    if (mesh.spheroid_axes) {
        // Radial projection onto the spheroid in coordinates where it is the unit sphere.
        const auto [ra, rc] = *mesh.spheroid_axes;
        const Vec3 D(ra, ra, rc);
        const Vec3 y = x.cwiseQuotient(D);
        const double r = y.norm();
        const Vec3 g = y / r;
        auto push = [&](const Vec3& v) {
            const Vec3 w = v.cwiseQuotient(D);
            return Vec3(D.cwiseProduct(w - g * g.dot(w)) / r);
        };
        x = D.cwiseProduct(g);
        x_xi = push(x_xi);
        x_eta = push(x_eta);
    }
    const Vec3 cross = x_xi.cross(x_eta);
    const double jac = cross.norm();
    const double scale = x_xi.norm() * x_eta.norm();
    if (!(jac > 1e-12 * scale) || !std::isfinite(jac))
        throw DegenerateElement(element, "isoparametric Jacobian vanishes");

    sp.x = x;
    sp.area_jacobian = jac;
    sp.frame.n = cross / jac;
    sp.frame.e1 = x_xi.normalized();
    sp.frame.e2 = sp.frame.n.cross(sp.frame.e1);

    // Dual basis g^alpha with g^alpha . g_beta = delta.
    Eigen::Matrix<double, 3, 2> J;
    J.col(0) = x_xi;
    J.col(1) = x_eta;
    const Eigen::Matrix2d G = J.transpose() * J;
    const Eigen::Matrix<double, 3, 2> dual = J * G.inverse();
    for (int a = 0; a < 4; ++a) {
        const Vec3 grad = sp.shape.dN_dxi[a] * dual.col(0) + sp.shape.dN_deta[a] * dual.col(1);
        sp.grad_local[a] = sp.frame.local(grad);
    }
    return sp;
}

TangentFrame tangent_frame_at(const SurfaceMesh& mesh, int element, const Vec2& local_coords) {
    return surface_point(mesh, element, local_coords).frame;
}

const std::array<Vec2, 4>& gauss_points_2x2() {
    static const double g = 1.0 / std::sqrt(3.0);
    static const std::array<Vec2, 4> pts{Vec2(-g, -g), Vec2(g, -g), Vec2(g, g), Vec2(-g, g)};
    return pts;
}

double element_area(const SurfaceMesh& mesh, int element) {
    double area = 0.0;
    for (const auto& g : gauss_points_2x2()) area += surface_point(mesh, element, g).area_jacobian;
    return area;
}

Vec3 element_centroid(const SurfaceMesh& mesh, int element) {
    return surface_point(mesh, element, Vec2::Zero()).x;
}

SurfaceMesh make_spheroid_mesh(int n_lat, int n_lon, bool half, double radius_xy,
                               double radius_z) {
    if (n_lat < 2) throw InvalidArgument("make_spheroid_mesh: n_lat must be >= 2");
    if (n_lon < 4 || n_lon % 4 != 0)
        throw InvalidArgument("make_spheroid_mesh: n_lon must be a multiple of 4, >= 4");
    if (!(radius_xy > 0.0) || !(radius_z > 0.0))
        throw InvalidArgument("make_spheroid_mesh: semi-axes must be positive");

    const int k = n_lon / 4;
    const int bands = n_lat - 1;  // node rings below the cap patch

    // Half of a cube rotated a quarter turn about z so the top face has its vertices on the
    // coordinate axes. Nodes are equiangular on each face and projected radially, which keeps
    // grid lines smooth inside every face.
    std::vector<Vec3> cube;
    std::vector<std::vector<int>> ring(bands + 1, std::vector<int>(n_lon));
    auto boundary_index = [k](int i, int j) {
        if (i == k) return j;
        if (j == k) return k + (k - i);
        if (i == 0) return 2 * k + (k - j);
        return 3 * k + i;
    };
    auto equiangular = [](double f) { return std::tan(0.25 * kPi * f); };
    std::vector<int> patch((k + 1) * (k + 1));
    for (int j = 0; j <= k; ++j) {
        for (int i = 0; i <= k; ++i) {
            const double u = equiangular(-1.0 + 2.0 * i / k);
            const double v = equiangular(-1.0 + 2.0 * j / k);
            const int id = static_cast<int>(cube.size());
            cube.emplace_back((u - v) / std::numbers::sqrt2, (u + v) / std::numbers::sqrt2, 1.0);
            patch[j * (k + 1) + i] = id;
            if (i == 0 || j == 0 || i == k || j == k) ring[0][boundary_index(i, j)] = id;
        }
    }
    // Side faces: the top outline carried down to the equator.
    for (int r = 1; r <= bands; ++r) {
        const double z = r == bands ? 0.0 : equiangular(static_cast<double>(bands - r) / bands);
        for (int b = 0; b < n_lon; ++b) {
            Vec3 p = cube[ring[0][b]];
            p.z() = z;
            ring[r][b] = static_cast<int>(cube.size());
            cube.push_back(p);
        }
    }

    SurfaceMesh mesh;
    const double a = radius_xy, c = radius_z;
    mesh.spheroid_axes = {a, c};
    mesh.nodes.reserve(half ? cube.size() : 2 * cube.size());
    for (const auto& p : cube) {
        const Vec3 n = p.normalized();
        mesh.nodes.emplace_back(a * n.x(), a * n.y(), c * n.z());
    }

    std::vector<std::array<int, 4>> upper;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i)
            upper.push_back({patch[j * (k + 1) + i], patch[j * (k + 1) + i + 1],
                             patch[(j + 1) * (k + 1) + i + 1], patch[(j + 1) * (k + 1) + i]});
    std::vector<EdgeRef> equator_edges;
    for (int r = 0; r < bands; ++r) {
        for (int b = 0; b < n_lon; ++b) {
            const int bn = (b + 1) % n_lon;
            if (r == bands - 1)
                equator_edges.emplace_back(static_cast<int>(upper.size()), 1);
            upper.push_back({ring[r][b], ring[r + 1][b], ring[r + 1][bn], ring[r][bn]});
        }
    }
    mesh.elements = upper;

    const auto& eq = ring[bands];
    mesh.node_sets["axis_x+"] = {eq[0]};
    mesh.node_sets["axis_y+"] = {eq[k]};
    mesh.node_sets["axis_x-"] = {eq[2 * k]};
    mesh.node_sets["axis_y-"] = {eq[3 * k]};
    if (k % 2 == 0) mesh.node_sets["pole_z+"] = {patch[(k / 2) * (k + 1) + k / 2]};

    if (half) {
        mesh.node_sets["symmetry"] = eq;
        mesh.boundary_edges["symmetry"] = equator_edges;
        return mesh;
    }

    // Lower hemisphere: mirror z -> -z, share the equator, reverse orientation.
    std::vector<int> mirror(cube.size());
    std::set<int> equator(eq.begin(), eq.end());
    for (std::size_t id = 0; id < cube.size(); ++id) {
        if (equator.count(static_cast<int>(id))) {
            mirror[id] = static_cast<int>(id);
        } else {
            Vec3 p = mesh.nodes[id];
            p.z() = -p.z();
            mirror[id] = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(p);
        }
    }
    for (const auto& el : upper)
        mesh.elements.push_back({mirror[el[0]], mirror[el[3]], mirror[el[2]], mirror[el[1]]});
    if (k % 2 == 0) mesh.node_sets["pole_z-"] = {mirror[patch[(k / 2) * (k + 1) + k / 2]]};
    mesh.node_sets["equator"] = eq;
    return mesh;
}

SurfaceMesh make_strip_mesh(int nx, int ny, double length, double width, double load_length,
                            LoadSegment segment) {
    if (nx < 1 || ny < 1) throw InvalidArgument("make_strip_mesh: nx and ny must be >= 1");
    if (!(length > 0.0) || !(width > 0.0))
        throw InvalidArgument("make_strip_mesh: dimensions must be positive");
    if (!(load_length > 0.0) || load_length > width)
        throw InvalidArgument("make_strip_mesh: load length must lie in (0, width]");

    SurfaceMesh mesh;
    auto node = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.nodes.emplace_back(length * i / nx, width * j / ny, 0.0);
    auto elem = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.elements.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});

    const double y0 = segment == LoadSegment::Centered ? 0.5 * (width - load_length) : 0.0;
    const double y1 = y0 + load_length;
    const double dy = width / ny;
    const double tol = 1e-12 * width;

    std::vector<EdgeRef> clamped, loaded, free, right;
    for (int j = 0; j < ny; ++j) {
        clamped.emplace_back(elem(0, j), 3);
        right.emplace_back(elem(nx - 1, j), 1);
        const double mid = (j + 0.5) * dy;
        if (mid >= y0 - tol && mid <= y1 + tol) loaded.emplace_back(elem(nx - 1, j), 1);
    }
    if (loaded.empty()) {
        // Segment shorter than one edge: load the edge holding its centre.
        const double centre = 0.5 * (y0 + y1);
        int j = std::min(ny - 1, static_cast<int>(std::floor(centre / dy)));
        loaded.emplace_back(elem(nx - 1, j), 1);
    }
    for (int i = 0; i < nx; ++i) {
        free.emplace_back(elem(i, 0), 0);
        free.emplace_back(elem(i, ny - 1), 2);
    }
    for (const auto& edge : right)
        if (std::find(loaded.begin(), loaded.end(), edge) == loaded.end()) free.push_back(edge);

    mesh.boundary_edges["clamped"] = clamped;
    mesh.boundary_edges["loaded"] = loaded;
    mesh.boundary_edges["free"] = free;
    mesh.boundary_edges["right"] = right;

    std::vector<int> clamped_nodes, all(mesh.nodes.size());
    for (int j = 0; j <= ny; ++j) clamped_nodes.push_back(node(0, j));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    mesh.node_sets["clamped"] = clamped_nodes;
    mesh.node_sets["all"] = all;
    return mesh;
}

double boundary_length(const SurfaceMesh& mesh, const std::string& label) {
    auto it = mesh.boundary_edges.find(label);
    if (it == mesh.boundary_edges.end())
        throw InvalidArgument("unknown boundary label '" + label + "'");
    double len = 0.0;
    for (const auto& [e, k] : it->second) {
        const auto& el = mesh.elements[e];
        len += (mesh.nodes[el[(k + 1) % 4]] - mesh.nodes[el[k]]).norm();
    }
    return len;
}

}  // namespace fibermem
