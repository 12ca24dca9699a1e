#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wireforge/engine.hpp"
#include "wireforge/geometry.hpp"
#include "wireforge/rasterizer.hpp"

namespace wireforge {

inline constexpr int kWireArtSchemaVersion = 1;

/// Contents of final_wireart.json: the control points plus everything needed
/// to reproduce the renders.
struct WireArtFile {
    WireArt art;
    Canvas canvas;
    Window window;
};

std::string wireart_to_json(const WireArtFile& file);
/// Throws ValidationError on schema problems.
WireArtFile wireart_from_json(const std::string& text);
void save_wireart(const WireArtFile& file, const std::filesystem::path& path);
WireArtFile load_wireart(const std::filesystem::path& path);

/// SVG 1.1, one <path> per wire with "M x y C x y, x y, x y ..." in pixel
/// coordinates (y down), 6 decimals.
std::string svg_document(std::span<const Chain2> wires_px, const Canvas& canvas);
void export_svg(std::span<const Chain2> wires_px, const Canvas& canvas, const std::filesystem::path& path);

/// Wavefront OBJ: "v" per flattened 3D vertex, one "l" polyline per wire.
std::string obj_document(const WireArt& art, int samples_per_segment);
void export_obj(const WireArt& art, int samples_per_segment, const std::filesystem::path& path);

/// iter,loss_x,loss_y,loss_z,mst_budget,total,ms
std::string trace_csv(std::span<const TraceRecord> trace);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace wireforge
