#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fibermem {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// (element index, local edge index). Local edge k joins local nodes k and (k+1) % 4.
using EdgeRef = std::pair<int, int>;

/// Discrete membrane surface made of bilinear 4-node quads.
///
/// Element nodes are ordered counter-clockwise when viewed from the side the
/// normal points to; for closed surfaces that side is the outside.
struct SurfaceMesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> elements;
    std::map<std::string, std::vector<EdgeRef>> boundary_edges;
    std::map<std::string, std::vector<int>> node_sets;
    /// Semi-axes (a, c) of x^2 + y^2 + (a z / c)^2 = a^2 when the elements map onto that
    /// exact surface; empty for plain bilinear geometry.
    std::optional<std::array<double, 2>> spheroid_axes;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }

    /// True when every node has z == 0 (the strip benchmark).
    bool is_planar(double tol = 0.0) const;

    /// Throws InvalidArgument / DegenerateElement when a structural invariant fails.
    void validate() const;
};

/// Orthonormal frame at a point of the discrete surface; e1 x e2 = n.
struct TangentFrame {
    Vec3 n;
    Vec3 e1;
    Vec3 e2;

    /// P = I - n n^T
    Mat3 tangent_projector() const;
    /// N = n n^T
    Mat3 normal_projector() const;
    /// Unit tangent rotated +90 degrees about n.
    Vec3 perpendicular(const Vec3& s) const { return n.cross(s); }
    /// Local (e1, e2) components of a tangent vector.
    Vec2 local(const Vec3& v) const { return {e1.dot(v), e2.dot(v)}; }
    Vec3 global(const Vec2& v) const { return v.x() * e1 + v.y() * e2; }
};

/// Bilinear shape functions and their reference derivatives.
struct ShapeEval {
    std::array<double, 4> N;
    std::array<double, 4> dN_dxi;
    std::array<double, 4> dN_deta;
};

ShapeEval bilinear_shape(const Vec2& local_coords);

/// Isoparametric geometry of one quad at one reference point.
struct SurfacePoint {
    Vec3 x;
    TangentFrame frame;
    double area_jacobian;                  // |x_xi x x_eta|
    std::array<Vec2, 4> grad_local;        // tangential gradient of N_a in (e1, e2) components
    ShapeEval shape;
};

/// Evaluates position, frame, area Jacobian and tangential shape gradients.
/// Throws DegenerateElement when the Jacobian is not positive.
SurfacePoint surface_point(const SurfaceMesh& mesh, int element, const Vec2& local_coords);

/// Frame from the isoparametric tangent vectors: e1 along x_xi, n along x_xi x x_eta.
TangentFrame tangent_frame_at(const SurfaceMesh& mesh, int element, const Vec2& local_coords);

/// 2x2 Gauss points of the reference square [-1, 1]^2, unit weights.
const std::array<Vec2, 4>& gauss_points_2x2();

/// Element area by 2x2 Gauss quadrature.
double element_area(const SurfaceMesh& mesh, int element);

Vec3 element_centroid(const SurfaceMesh& mesh, int element);

/// Structured quad mesh of the spheroid x^2 + y^2 + (z / c)^2 = a^2 with a = radius_xy,
/// c = radius_z (defaults give x^2 + y^2 + (2z)^2 = 1).
///
/// The hemisphere is half of an equiangular cubed sphere turned a quarter turn about z:
/// an (n_lon/4) x (n_lon/4) top face with its vertices on the coordinate axes, then
/// n_lat - 1 rings of n_lon elements down to the equator. n_lon must be a multiple of 4.
/// Elements per hemisphere: (n_lon/4)^2 + (n_lat - 1) * n_lon. Elements evaluate on the
/// exact spheroid (see SurfaceMesh::spheroid_axes).
///
/// half = true keeps the z >= 0 hemisphere; the equator nodes form node set "symmetry"
/// and the equator edges boundary label "symmetry". Node sets "axis_x+", "axis_y+",
/// "axis_y-", "axis_x-" and "pole_z+" (plus "pole_z-" on the closed surface) hold the
/// single nodes on the coordinate axes.
SurfaceMesh make_spheroid_mesh(int n_lat, int n_lon, bool half, double radius_xy = 1.0,
                               double radius_z = 0.5);

/// Position of the loaded segment on the short side opposite the clamp.
enum class LoadSegment { Centered, Corner };

/// Planar nx x ny grid on [0, length] x [0, width] (defaults 1 x 0.5).
///
/// Boundary labels: "clamped" (x = 0), "loaded" (edges on x = length whose midpoints
/// lie in the segment of length load_length), "free" (all remaining boundary edges),
/// "right" (the whole x = length side). Node sets: "clamped", "all".
SurfaceMesh make_strip_mesh(int nx, int ny, double length = 1.0, double width = 0.5,
                            double load_length = 0.1,
                            LoadSegment segment = LoadSegment::Centered);

/// Total length of the edges carrying a boundary label.
double boundary_length(const SurfaceMesh& mesh, const std::string& label);

}  // namespace fibermem
