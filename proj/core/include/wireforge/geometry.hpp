#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wireforge {

struct Point3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Point3& operator-=(const Point3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Point3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
    friend Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
    friend Point3 operator*(Point3 a, double s) { return a *= s; }
    friend Point3 operator*(double s, Point3 a) { return a *= s; }
    friend Point3 operator-(const Point3& a) { return {-a.x, -a.y, -a.z}; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(const Point3& a, const Point3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }
inline double squared_norm(const Point3& a) { return dot(a, a); }
inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

struct Point2 {
    double x = 0, y = 0;

    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }

    Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }
    Point2& operator-=(const Point2& o) { x -= o.x; y -= o.y; return *this; }
    Point2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend Point2 operator+(Point2 a, const Point2& b) { return a += b; }
    friend Point2 operator-(Point2 a, const Point2& b) { return a -= b; }
    friend Point2 operator*(Point2 a, double s) { return a *= s; }
    friend Point2 operator*(double s, Point2 a) { return a *= s; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Point2& a) { return std::sqrt(dot(a, a)); }

/// Cubic Bernstein weights (1-t)^3, 3(1-t)^2 t, 3(1-t) t^2, t^3.
inline std::array<double, 4> bernstein3(double t) {
    const double s = 1.0 - t;
    return {s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t};
}

struct CubicSegment {
    std::array<Point3, 4> p;
};

struct CubicSegment2 {
    std::array<Point2, 4> p;
};

/// Point on a 3D cubic Bezier. Throws DomainError for t outside [0,1].
Point3 bezier_point(const CubicSegment& seg, double t);
Point2 bezier_point(const CubicSegment2& seg, double t);

/// A chain of C0-connected cubic segments stored as 3k+1 control points;
/// segment k uses points [3k, 3k+3], so joints are stored once.
template <typename P>
struct BasicChain {
    std::vector<P> points;

    std::size_t segment_count() const { return points.size() < 4 ? 0 : (points.size() - 1) / 3; }
    static bool valid_size(std::size_t n) { return n >= 4 && (n - 1) % 3 == 0; }
};

using Chain2 = BasicChain<Point2>;

CubicSegment2 segment_of(const Chain2& chain, std::size_t k);

/// One sculptural wire: an id plus its chained control points.
struct Wire {
    int id = 0;
    std::vector<Point3> points;

    std::size_t segment_count() const { return (points.size() - 1) / 3; }
    CubicSegment segment(std::size_t k) const;
};

/// The whole sculpture. All distinct control points live in one flat buffer
/// (the optimization variable); wires are index ranges into it.
class WireArt {
public:
    struct Layout {
        int id = 0;
        std::size_t offset = 0;
        std::size_t segments = 0;

        std::size_t point_count() const { return 3 * segments + 1; }
        std::size_t head() const { return offset; }
        std::size_t tail() const { return offset + 3 * segments; }

        friend bool operator==(const Layout&, const Layout&) = default;
    };

    WireArt() = default;
    explicit WireArt(const std::vector<Wire>& wires);

    /// Appends a wire; throws ConfigError unless points.size() == 3k+1, k >= 1, all finite.
    std::size_t add_wire(std::span<const Point3> points, int id);

    std::size_t wire_count() const { return layouts_.size(); }
    const Layout& layout(std::size_t i) const { return layouts_.at(i); }
    const std::vector<Layout>& layouts() const { return layouts_; }

    std::span<Point3> all_points() { return points_; }
    std::span<const Point3> all_points() const { return points_; }
    std::size_t point_count() const { return points_.size(); }

    std::span<const Point3> wire_points(std::size_t i) const;
    std::span<Point3> wire_points(std::size_t i);
    CubicSegment segment(std::size_t wire, std::size_t k) const;
    Wire wire(std::size_t i) const;

    /// Flat indices of the (head, tail) endpoints of wire i.
    std::pair<std::size_t, std::size_t> endpoints(std::size_t i) const {
        const auto& l = layouts_.at(i);
        return {l.head(), l.tail()};
    }

    friend bool operator==(const WireArt&, const WireArt&) = default;

private:
    std::vector<Point3> points_;
    std::vector<Layout> layouts_;
};

enum class ViewId { X = 0, Y = 1, Z = 2 };
inline constexpr std::array<ViewId, 3> kAllViews{ViewId::X, ViewId::Y, ViewId::Z};
const char* view_name(ViewId v);

/// Orthographic view plane: unit normal, a point on the plane, and a
/// right-handed in-plane basis (u x v = normal).
class ViewPlane {
public:
    /// Throws ConfigError unless the basis is orthonormal and right-handed within 1e-12.
    ViewPlane(Point3 normal, Point3 origin, Point3 u, Point3 v);

    /// Coordinate plane through the origin. X: (u=+Y, v=+Z), Y: (u=+Z, v=+X), Z: (u=+X, v=+Y).
    static ViewPlane axis(ViewId view);

    const Point3& normal() const { return normal_; }
    const Point3& origin() const { return origin_; }
    const Point3& u() const { return u_; }
    const Point3& v() const { return v_; }

private:
    Point3 normal_, origin_, u_, v_;
};

/// Maps in-plane offsets to canvas-normalized coordinates: offset / scale + center.
struct Window {
    double scale = 2.0;
    Point2 center{0.5, 0.5};
};

/// Affine map R^3 -> R^2: out = A p + b.
struct ProjectionMap {
    std::array<std::array<double, 3>, 2> a{};
    std::array<double, 2> b{};

    Point2 apply(const Point3& p) const {
        return {a[0][0] * p.x + a[0][1] * p.y + a[0][2] * p.z + b[0],
                a[1][0] * p.x + a[1][1] * p.y + a[1][2] * p.z + b[1]};
    }
    /// A^T g.
    Point3 transpose_apply(const Point2& g) const {
        return {a[0][0] * g.x + a[1][0] * g.y, a[0][1] * g.x + a[1][1] * g.y,
                a[0][2] * g.x + a[1][2] * g.y};
    }
    /// Post-composes a per-axis scale and offset: out' = diag(sx, sy) out + (ox, oy).
    ProjectionMap then_scale(double sx, double sy, double ox, double oy) const;
};

Point3 project_point(const Point3& p, const ViewPlane& plane);

/// Plane point to canvas-normalized coordinates. Throws ConfigError for a zero
/// window scale and ContractError if p is farther than 1e-9 from the plane.
Point2 to_plane_coords(const Point3& p, const ViewPlane& plane, const Window& window);

/// The composed map to_plane_coords(project_point(.)) as a matrix.
ProjectionMap projection_map(const ViewPlane& plane, const Window& window);

Chain2 project_wire(std::span<const Point3> wire_points, const ViewPlane& plane, const Window& window);

/// Pulls per-2D-control-point gradients back to 3D through the projection (A^T g).
std::vector<Point3> backproject_gradient(std::span<const Point2> g2d, const ViewPlane& plane,
                                         const Window& window);

}  // namespace wireforge
