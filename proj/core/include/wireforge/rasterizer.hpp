#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wireforge/geometry.hpp"
#include "wireforge/image.hpp"

namespace wireforge {

/// Raster target for stroke rendering. Lengths are in pixels.
struct Canvas {
    int width = 256;
    int height = 256;
    double stroke_width = 3.0;
    double aa_width = 1.0;
    /// Flattening density per cubic segment; 0 selects the size-scaled default.
    int samples_per_segment = 0;

    /// Throws ConfigError if any invariant is violated.
    void validate() const;
    /// 24 samples at a 256 px edge, scaled linearly with the longer edge.
    int effective_samples() const;
    /// Distance below which coverage is full / above which it is zero.
    double inner_radius() const { return stroke_width / 2 - aa_width; }
    double outer_radius() const { return stroke_width / 2 + aa_width; }
};

/// Canvas-normalized coordinates [0,1]^2 (y up) to pixel coordinates (y down),
/// composed after a view projection.
ProjectionMap pixel_map(const ViewPlane& plane, const Window& window, const Canvas& canvas);

struct VertexSource {
    int segment = 0;
    double t = 0;
};

struct Polyline {
    std::vector<Point2> vertices;
    std::vector<VertexSource> sources;
};

/// Samples a 2D cubic at t_k = k / (samples - 1).
Polyline flatten(const CubicSegment2& seg, int samples);
/// Flattens a whole chain; joint vertices appear once.
Polyline flatten(const Chain2& chain, int samples);

using RasterGradients = std::vector<std::vector<Point2>>;

/// One forward evaluation: flattened strokes plus the per-pixel nearest-piece
/// field. The backward pass reuses the field (closest assignment held fixed).
class RasterPass {
public:
    struct Nearest {
        double distance;
        std::int32_t wire;   // -1: no stroke within outer radius
        std::int32_t piece;  // index of the first vertex of the nearest piece
    };

    enum class Strategy { Binned, Naive };

    RasterPass(std::span<const Chain2> wires_px, const Canvas& canvas, Strategy strategy = Strategy::Binned);

    const Canvas& canvas() const { return canvas_; }
    const std::vector<Polyline>& polylines() const { return polylines_; }
    const std::vector<Nearest>& field() const { return field_; }

    Image image() const;
    /// dL/d(2D control point), aligned with the input chains.
    RasterGradients backward(const Image& upstream) const;

private:
    void build_binned();
    void build_naive();

    Canvas canvas_;
    std::vector<std::size_t> chain_sizes_;
    std::vector<Polyline> polylines_;
    std::vector<Nearest> field_;
};

/// Anti-aliased black strokes on white. Pixel value is smoothstep of the
/// distance to the nearest stroke across [inner_radius, outer_radius].
Image render(std::span<const Chain2> wires_px, const Canvas& canvas);

/// Throws ContractError if upstream does not match the canvas dimensions.
RasterGradients render_backward(std::span<const Chain2> wires_px, const Canvas& canvas, const Image& upstream);

}  // namespace wireforge
