#include "wireforge/geometry.hpp"

#include <string>

#include "wireforge/errors.hpp"

namespace wireforge {

namespace {

void check_parameter(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("bezier parameter t=" + std::to_string(t) + " outside [0,1]");
}

}  // namespace

Point3 bezier_point(const CubicSegment& seg, double t) {
    check_parameter(t);
    const auto w = bernstein3(t);
    return w[0] * seg.p[0] + w[1] * seg.p[1] + w[2] * seg.p[2] + w[3] * seg.p[3];
}

Point2 bezier_point(const CubicSegment2& seg, double t) {
    check_parameter(t);
    const auto w = bernstein3(t);
    return w[0] * seg.p[0] + w[1] * seg.p[1] + w[2] * seg.p[2] + w[3] * seg.p[3];
}

CubicSegment2 segment_of(const Chain2& chain, std::size_t k) {
    if (3 * k + 3 >= chain.points.size()) throw ContractError("segment index out of range");
    const auto* p = chain.points.data() + 3 * k;
    return {{p[0], p[1], p[2], p[3]}};
}

CubicSegment Wire::segment(std::size_t k) const {
    if (3 * k + 3 >= points.size()) throw ContractError("segment index out of range");
    const auto* p = points.data() + 3 * k;
    return {{p[0], p[1], p[2], p[3]}};
}

WireArt::WireArt(const std::vector<Wire>& wires) {
    for (const auto& w : wires) add_wire(w.points, w.id);
}

std::size_t WireArt::add_wire(std::span<const Point3> points, int id) {
    if (!Chain2::valid_size(points.size()))
        throw ConfigError("wire needs 3k+1 control points with k >= 1, got " + std::to_string(points.size()));
    for (const auto& p : points)
        if (!is_finite(p)) throw ConfigError("wire control point is not finite");
    Layout l{id, points_.size(), (points.size() - 1) / 3};
    points_.insert(points_.end(), points.begin(), points.end());
    layouts_.push_back(l);
    return layouts_.size() - 1;
}

std::span<const Point3> WireArt::wire_points(std::size_t i) const {
    const auto& l = layouts_.at(i);
    return std::span<const Point3>(points_).subspan(l.offset, l.point_count());
}

std::span<Point3> WireArt::wire_points(std::size_t i) {
    const auto& l = layouts_.at(i);
    return std::span<Point3>(points_).subspan(l.offset, l.point_count());
}

CubicSegment WireArt::segment(std::size_t wire, std::size_t k) const {
    const auto& l = layouts_.at(wire);
    if (k >= l.segments) throw ContractError("segment index out of range");
    const auto* p = points_.data() + l.offset + 3 * k;
    return {{p[0], p[1], p[2], p[3]}};
}

Wire WireArt::wire(std::size_t i) const {
    auto pts = wire_points(i);
    return Wire{layouts_.at(i).id, std::vector<Point3>(pts.begin(), pts.end())};
}

const char* view_name(ViewId v) {
    switch (v) {
        case ViewId::X: return "X";
        case ViewId::Y: return "Y";
        case ViewId::Z: return "Z";
    }
    return "?";
}

ViewPlane::ViewPlane(Point3 normal, Point3 origin, Point3 u, Point3 v)
    : normal_(normal), origin_(origin), u_(u), v_(v) {
    constexpr double tol = 1e-12;
    if (!is_finite(normal) || !is_finite(origin) || !is_finite(u) || !is_finite(v))
        throw ConfigError("view plane has non-finite components");
    if (std::abs(norm(normal) - 1) > tol || std::abs(norm(u) - 1) > tol || std::abs(norm(v) - 1) > tol)
        throw ConfigError("view plane normal and basis must be unit length");
    if (std::abs(dot(u, v)) > tol || std::abs(dot(u, normal)) > tol || std::abs(dot(v, normal)) > tol)
        throw ConfigError("view plane basis must be orthogonal");
    if (norm(cross(u, v) - normal) > tol) throw ConfigError("view plane basis must be right-handed (u x v = N)");
}

ViewPlane ViewPlane::axis(ViewId view) {
    const Point3 ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1}, o{};
    switch (view) {
        case ViewId::X: return ViewPlane(ex, o, ey, ez);
        case ViewId::Y: return ViewPlane(ey, o, ez, ex);
        case ViewId::Z: return ViewPlane(ez, o, ex, ey);
    }
    throw ConfigError("unknown view");
}

ProjectionMap ProjectionMap::then_scale(double sx, double sy, double ox, double oy) const {
    ProjectionMap out;
    for (int c = 0; c < 3; ++c) {
        out.a[0][c] = sx * a[0][c];
        out.a[1][c] = sy * a[1][c];
    }
    out.b = {sx * b[0] + ox, sy * b[1] + oy};
    return out;
}

Point3 project_point(const Point3& p, const ViewPlane& plane) {
    const auto& n = plane.normal();
    return p - dot(n, p - plane.origin()) * n;
}

Point2 to_plane_coords(const Point3& p, const ViewPlane& plane, const Window& window) {
    if (window.scale == 0.0 || !std::isfinite(window.scale)) throw ConfigError("window scale must be finite and non-zero");
    const Point3 d = p - plane.origin();
    if (std::abs(dot(plane.normal(), d)) > 1e-9) throw ContractError("point does not lie on the view plane");
    return {dot(plane.u(), d) / window.scale + window.center.x, dot(plane.v(), d) / window.scale + window.center.y};
}

ProjectionMap projection_map(const ViewPlane& plane, const Window& window) {
    if (window.scale == 0.0 || !std::isfinite(window.scale)) throw ConfigError("window scale must be finite and non-zero");
    // u . (p - N(N.(p-q)) - q) == u . (p - q) since u is orthogonal to N.
    ProjectionMap m;
    const auto& q = plane.origin();
    for (int c = 0; c < 3; ++c) {
        m.a[0][c] = plane.u()[c] / window.scale;
        m.a[1][c] = plane.v()[c] / window.scale;
    }
    m.b[0] = window.center.x - dot(plane.u(), q) / window.scale;
    m.b[1] = window.center.y - dot(plane.v(), q) / window.scale;
    return m;
}

Chain2 project_wire(std::span<const Point3> wire_points, const ViewPlane& plane, const Window& window) {
    Chain2 out;
    out.points.reserve(wire_points.size());
    for (const auto& p : wire_points) out.points.push_back(to_plane_coords(project_point(p, plane), plane, window));
    return out;
}

std::vector<Point3> backproject_gradient(std::span<const Point2> g2d, const ViewPlane& plane,
                                         const Window& window) {
    const auto m = projection_map(plane, window);
    std::vector<Point3> out;
    out.reserve(g2d.size());
    for (const auto& g : g2d) out.push_back(m.transpose_apply(g));
    return out;
}

}  // namespace wireforge
