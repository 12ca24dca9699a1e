#include "wireforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wireforge/errors.hpp"

namespace wireforge {

using nlohmann::json;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string general17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string wireart_to_json(const WireArtFile& file) {
    json wires = json::array();
    for (std::size_t i = 0; i < file.art.wire_count(); ++i) {
        json pts = json::array();
        for (const auto& p : file.art.wire_points(i)) pts.push_back({p.x, p.y, p.z});
        wires.push_back({{"id", file.art.layout(i).id},
                         {"segments", file.art.layout(i).segments},
                         {"points", std::move(pts)}});
    }
    json j{
        {"format", "wireforge.wireart"},
        {"version", kWireArtSchemaVersion},
        {"render",
         {{"width", file.canvas.width},
          {"height", file.canvas.height},
          {"stroke_width", file.canvas.stroke_width},
          {"aa_width", file.canvas.aa_width},
          {"samples_per_segment", file.canvas.samples_per_segment},
          {"window_scale", file.window.scale},
          {"window_center", {file.window.center.x, file.window.center.y}}}},
        {"wires", std::move(wires)},
    };
    return j.dump(2) + "\n";
}

WireArtFile wireart_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError({std::string("wireart file is not valid JSON: ") + e.what()});
    }
    std::vector<std::string> problems;
    WireArtFile out;
    try {
        if (j.value("format", "") != "wireforge.wireart") problems.push_back("format must be \"wireforge.wireart\"");
        const int version = j.at("version").get<int>();
        if (version != kWireArtSchemaVersion)
            problems.push_back("unsupported wireart schema version " + std::to_string(version));
        const auto& r = j.at("render");
        out.canvas.width = r.at("width").get<int>();
        out.canvas.height = r.at("height").get<int>();
        out.canvas.stroke_width = r.at("stroke_width").get<double>();
        out.canvas.aa_width = r.at("aa_width").get<double>();
        out.canvas.samples_per_segment = r.at("samples_per_segment").get<int>();
        out.window.scale = r.at("window_scale").get<double>();
        out.window.center = {r.at("window_center").at(0).get<double>(), r.at("window_center").at(1).get<double>()};
        try {
            out.canvas.validate();
        } catch (const ConfigError& e) {
            problems.push_back(e.what());
        }
        std::size_t index = 0;
        for (const auto& w : j.at("wires")) {
            std::vector<Point3> pts;
            for (const auto& p : w.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
            const auto segments = w.at("segments").get<std::size_t>();
            if (pts.size() != 3 * segments + 1) {
                problems.push_back("wire " + std::to_string(index) + ": " + std::to_string(pts.size()) +
                                   " points do not match " + std::to_string(segments) + " segments");
            } else {
                try {
                    out.art.add_wire(pts, w.at("id").get<int>());
                } catch (const ConfigError& e) {
                    problems.push_back("wire " + std::to_string(index) + ": " + e.what());
                }
            }
            ++index;
        }
    } catch (const json::exception& e) {
        problems.push_back(std::string("wireart schema violation: ") + e.what());
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return out;
}

void save_wireart(const WireArtFile& file, const std::filesystem::path& path) {
    write_text(path, wireart_to_json(file));
}

WireArtFile load_wireart(const std::filesystem::path& path) { return wireart_from_json(read_text(path)); }

std::string svg_document(std::span<const Chain2> wires_px, const Canvas& canvas) {
    std::ostringstream os;
    const auto w = std::to_string(canvas.width), h = std::to_string(canvas.height);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    for (const auto& chain : wires_px) {
        if (chain.segment_count() == 0) continue;
        const auto& p = chain.points;
        os << "  <path d=\"M " << fixed6(p[0].x) << " " << fixed6(p[0].y);
        for (std::size_t k = 0; k < chain.segment_count(); ++k) {
            const auto* c = p.data() + 3 * k;
            os << " C " << fixed6(c[1].x) << " " << fixed6(c[1].y) << ", " << fixed6(c[2].x) << " " << fixed6(c[2].y)
               << ", " << fixed6(c[3].x) << " " << fixed6(c[3].y);
        }
        os << "\" fill=\"none\" stroke=\"black\" stroke-width=\"" << fixed6(canvas.stroke_width)
           << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void export_svg(std::span<const Chain2> wires_px, const Canvas& canvas, const std::filesystem::path& path) {
    write_text(path, svg_document(wires_px, canvas));
}

std::string obj_document(const WireArt& art, int samples_per_segment) {
    if (samples_per_segment < 2) throw ContractError("OBJ export needs at least 2 samples per segment");
    std::ostringstream os;
    os << "# wireforge wire art: " << art.wire_count() << " wires\n";
    std::vector<std::vector<std::size_t>> lines(art.wire_count());
    std::size_t next = 1;
    for (std::size_t w = 0; w < art.wire_count(); ++w) {
        os << "o wire_" << art.layout(w).id << "\n";
        const std::size_t segments = art.layout(w).segments;
        for (std::size_t k = 0; k < segments; ++k) {
            const auto seg = art.segment(w, k);
            for (int s = (k == 0 ? 0 : 1); s < samples_per_segment; ++s) {
                const auto p = bezier_point(seg, static_cast<double>(s) / (samples_per_segment - 1));
                os << "v " << fixed6(p.x) << " " << fixed6(p.y) << " " << fixed6(p.z) << "\n";
                lines[w].push_back(next++);
            }
        }
        os << "l";
        for (auto idx : lines[w]) os << " " << idx;
        os << "\n";
    }
    return os.str();
}

void export_obj(const WireArt& art, int samples_per_segment, const std::filesystem::path& path) {
    write_text(path, obj_document(art, samples_per_segment));
}

std::string trace_csv(std::span<const TraceRecord> trace) {
    std::ostringstream os;
    os << "iter,loss_x,loss_y,loss_z,mst_budget,total,ms\n";
    for (const auto& r : trace) {
        os << r.iteration << "," << general17(r.view_loss[0]) << "," << general17(r.view_loss[1]) << ","
           << general17(r.view_loss[2]) << "," << general17(r.mst_budget) << "," << general17(r.total) << ","
           << fixed6(r.ms) << "\n";
    }
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw Error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace wireforge
