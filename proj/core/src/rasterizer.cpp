#include "wireforge/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wireforge/errors.hpp"

namespace wireforge {

namespace {

struct Closest {
    double distance;
    double tau;
    Point2 point;
};

// Endpoint cases return the vertex itself so joints shared by two pieces tie exactly.
inline Closest closest_on_piece(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    double tau = 0;
    Point2 c = a;
    if (len2 > 0) {
        tau = dot(p - a, ab) / len2;
        if (tau <= 0) {
            tau = 0;
            c = a;
        } else if (tau >= 1) {
            tau = 1;
            c = b;
        } else {
            c = a + tau * ab;
        }
    }
    return {norm(p - c), tau, c};
}

inline double smoothstep01(double x) { return x * x * (3 - 2 * x); }

}  // namespace

void Canvas::validate() const {
    if (width < 16 || height < 16) throw ConfigError("canvas must be at least 16x16 pixels");
    if (!(stroke_width > 0)) throw ConfigError("stroke_width must be positive");
    if (!(aa_width > 0)) throw ConfigError("aa_width must be positive");
    if (samples_per_segment != 0 && samples_per_segment < 2) throw ConfigError("samples_per_segment must be >= 2");
}

int Canvas::effective_samples() const {
    if (samples_per_segment > 0) return samples_per_segment;
    const int edge = std::max(width, height);
    return std::max(2, static_cast<int>(std::lround(24.0 * edge / 256.0)));
}

ProjectionMap pixel_map(const ViewPlane& plane, const Window& window, const Canvas& canvas) {
    return projection_map(plane, window).then_scale(canvas.width, -canvas.height, 0.0, canvas.height);
}

Polyline flatten(const CubicSegment2& seg, int samples) {
    if (samples < 2) throw ContractError("flatten needs at least 2 samples");
    Polyline out;
    out.vertices.reserve(samples);
    out.sources.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / (samples - 1);
        out.vertices.push_back(bezier_point(seg, t));
        out.sources.push_back({0, t});
    }
    return out;
}

Polyline flatten(const Chain2& chain, int samples) {
    if (samples < 2) throw ContractError("flatten needs at least 2 samples");
    const std::size_t segments = chain.segment_count();
    if (segments == 0) throw ContractError("chain needs 3k+1 control points");
    Polyline out;
    out.vertices.reserve(segments * (samples - 1) + 1);
    out.sources.reserve(segments * (samples - 1) + 1);
    for (std::size_t s = 0; s < segments; ++s) {
        const auto seg = segment_of(chain, s);
        for (int k = (s == 0 ? 0 : 1); k < samples; ++k) {
            const double t = static_cast<double>(k) / (samples - 1);
            out.vertices.push_back(bezier_point(seg, t));
            out.sources.push_back({static_cast<int>(s), t});
        }
    }
    return out;
}

RasterPass::RasterPass(std::span<const Chain2> wires_px, const Canvas& canvas, Strategy strategy)
    : canvas_(canvas) {
    canvas_.validate();
    const int samples = canvas_.effective_samples();
    polylines_.reserve(wires_px.size());
    for (const auto& chain : wires_px) {
        chain_sizes_.push_back(chain.points.size());
        polylines_.push_back(flatten(chain, samples));
    }
    field_.assign(static_cast<std::size_t>(canvas_.width) * canvas_.height,
                  Nearest{std::numeric_limits<double>::infinity(), -1, -1});
    if (strategy == Strategy::Binned) build_binned();
    else build_naive();
}

// Each piece only touches pixels inside its bounding box inflated by the outer
// radius; pieces are visited in (wire, piece) order with a strict comparison,
// which reproduces the naive scan exactly.
void RasterPass::build_binned() {
    const double reach = canvas_.outer_radius();
    const int w = canvas_.width, h = canvas_.height;
    for (std::size_t wi = 0; wi < polylines_.size(); ++wi) {
        const auto& v = polylines_[wi].vertices;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const Point2 a = v[i], b = v[i + 1];
            const double x0 = std::min(a.x, b.x) - reach, x1 = std::max(a.x, b.x) + reach;
            const double y0 = std::min(a.y, b.y) - reach, y1 = std::max(a.y, b.y) + reach;
            if (!(x1 >= 0.0 && y1 >= 0.0 && x0 <= w && y0 <= h)) continue;
            const int px0 = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
            const int px1 = std::min(w - 1, static_cast<int>(std::floor(x1 - 0.5)));
            const int py0 = std::max(0, static_cast<int>(std::ceil(y0 - 0.5)));
            const int py1 = std::min(h - 1, static_cast<int>(std::floor(y1 - 0.5)));
            for (int y = py0; y <= py1; ++y) {
                auto* row = field_.data() + static_cast<std::size_t>(y) * w;
                for (int x = px0; x <= px1; ++x) {
                    const double d = closest_on_piece({x + 0.5, y + 0.5}, a, b).distance;
                    if (d < reach && d < row[x].distance)
                        row[x] = {d, static_cast<std::int32_t>(wi), static_cast<std::int32_t>(i)};
                }
            }
        }
    }
}

void RasterPass::build_naive() {
    const double reach = canvas_.outer_radius();
    for (int y = 0; y < canvas_.height; ++y) {
        for (int x = 0; x < canvas_.width; ++x) {
            const Point2 p{x + 0.5, y + 0.5};
            Nearest best{std::numeric_limits<double>::infinity(), -1, -1};
            for (std::size_t wi = 0; wi < polylines_.size(); ++wi) {
                const auto& v = polylines_[wi].vertices;
                for (std::size_t i = 0; i + 1 < v.size(); ++i) {
                    const double d = closest_on_piece(p, v[i], v[i + 1]).distance;
                    if (d < best.distance) best = {d, static_cast<std::int32_t>(wi), static_cast<std::int32_t>(i)};
                }
            }
            if (best.distance < reach) field_[static_cast<std::size_t>(y) * canvas_.width + x] = best;
        }
    }
}

Image RasterPass::image() const {
    Image out(canvas_.width, canvas_.height, 1.0);
    const double e0 = canvas_.inner_radius(), e1 = canvas_.outer_radius();
    for (std::size_t i = 0; i < field_.size(); ++i) {
        if (field_[i].wire < 0) continue;
        const double x = std::clamp((field_[i].distance - e0) / (e1 - e0), 0.0, 1.0);
        out.data[i] = smoothstep01(x);
    }
    return out;
}

RasterGradients RasterPass::backward(const Image& upstream) const {
    if (upstream.width != canvas_.width || upstream.height != canvas_.height)
        throw ContractError("upstream gradient is " + std::to_string(upstream.width) + "x" +
                            std::to_string(upstream.height) + ", canvas is " + std::to_string(canvas_.width) + "x" +
                            std::to_string(canvas_.height));
    const double e0 = canvas_.inner_radius(), e1 = canvas_.outer_radius();
    const double band = e1 - e0;

    std::vector<std::vector<Point2>> vertex_grad(polylines_.size());
    for (std::size_t wi = 0; wi < polylines_.size(); ++wi)
        vertex_grad[wi].assign(polylines_[wi].vertices.size(), Point2{});

    for (int y = 0; y < canvas_.height; ++y) {
        for (int x = 0; x < canvas_.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * canvas_.width + x;
            const auto& nearest = field_[idx];
            const double up = upstream.data[idx];
            if (nearest.wire < 0 || up == 0.0) continue;
            const double s = (nearest.distance - e0) / band;
            if (s <= 0.0 || s >= 1.0 || nearest.distance == 0.0) continue;
            const double dpix_dd = 6.0 * s * (1.0 - s) / band;
            const auto& v = polylines_[nearest.wire].vertices;
            const Point2 p{x + 0.5, y + 0.5};
            const auto c = closest_on_piece(p, v[nearest.piece], v[nearest.piece + 1]);
            const Point2 dir = (p - c.point) * (1.0 / c.distance);
            const double k = up * dpix_dd;
            auto& g = vertex_grad[nearest.wire];
            g[nearest.piece] -= dir * (k * (1.0 - c.tau));
            g[nearest.piece + 1] -= dir * (k * c.tau);
        }
    }

    RasterGradients out(polylines_.size());
    for (std::size_t wi = 0; wi < polylines_.size(); ++wi) {
        out[wi].assign(chain_sizes_[wi], Point2{});
        const auto& src = polylines_[wi].sources;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const Point2 g = vertex_grad[wi][i];
            if (g.x == 0.0 && g.y == 0.0) continue;
            const auto w = bernstein3(src[i].t);
            const std::size_t base = 3 * static_cast<std::size_t>(src[i].segment);
            for (int j = 0; j < 4; ++j) out[wi][base + j] += g * w[j];
        }
    }
    return out;
}

Image render(std::span<const Chain2> wires_px, const Canvas& canvas) {
    return RasterPass(wires_px, canvas).image();
}

RasterGradients render_backward(std::span<const Chain2> wires_px, const Canvas& canvas, const Image& upstream) {
    return RasterPass(wires_px, canvas).backward(upstream);
}

}  // namespace wireforge
