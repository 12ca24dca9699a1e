#include "wireforge/app/commands.hpp"

#include <atomic>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include <wireforge/bridge.hpp>
#include <wireforge/errors.hpp>
#include <wireforge/image.hpp>
#include <wireforge/io.hpp>
#include <wireforge/testkit/audits.hpp>

namespace wireforge::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

constexpr const char* kCheckpointFormat = "wireforge.checkpoint";
constexpr int kCheckpointVersion = 1;

std::string format(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

// Echo of the spec with the iteration budget and output folded out, so a
// checkpoint can be resumed with a larger budget.
std::string resume_fingerprint(RunSpec spec) {
    spec.config.iterations = 0;
    spec.output_dir.clear();
    return echo_spec(spec);
}

Image fit_to_canvas(Image img, const Canvas& canvas) {
    if (img.width != canvas.width || img.height != canvas.height) img = resize(img, canvas.width, canvas.height);
    return img;
}

void save_checkpoint(const fs::path& path, const RunSpec& spec, const RunState& state,
                     const std::vector<TraceRecord>& trace) {
    json records = json::array();
    for (const auto& r : trace)
        records.push_back({r.iteration, r.view_loss[0], r.view_loss[1], r.view_loss[2], r.mst_budget, r.total, r.ms});
    const json j{
        {"format", kCheckpointFormat},
        {"version", kCheckpointVersion},
        {"iteration", state.iteration},
        {"fingerprint", resume_fingerprint(spec)},
        {"wireart", json::parse(wireart_to_json({state.art, spec.config.canvas, spec.config.window}))},
        {"adam", {{"step", state.adam.step}, {"m", state.adam.m}, {"v", state.adam.v}}},
        {"trace", records},
    };
    // Write-then-rename so an interrupted save never leaves a torn checkpoint.
    const auto tmp = fs::path(path).concat(".tmp");
    write_text(tmp, j.dump());
    fs::rename(tmp, path);
}

struct Restored {
    RunState state;
    std::vector<TraceRecord> trace;
};

Restored load_checkpoint(const fs::path& path, const RunSpec& spec) {
    const auto& c = spec.config;
    Restored out;
    try {
        const json j = json::parse(read_text(path));
        if (j.at("format") != kCheckpointFormat || j.at("version") != kCheckpointVersion)
            throw ValidationError({"'" + path.string() + "' is not a version 1 wireforge checkpoint"});
        if (j.at("fingerprint").get<std::string>() != resume_fingerprint(spec))
            throw ValidationError({"checkpoint '" + path.string() +
                                   "' was written with different settings; only run.iterations may change"});
        out.state.art = wireart_from_json(j.at("wireart").dump()).art;
        out.state.iteration = j.at("iteration").get<int>();
        out.state.adam = AdamState(out.state.art.point_count(), c.beta1, c.beta2, c.adam_epsilon);
        out.state.adam.step = j.at("adam").at("step").get<std::int64_t>();
        out.state.adam.m = j.at("adam").at("m").get<std::vector<double>>();
        out.state.adam.v = j.at("adam").at("v").get<std::vector<double>>();
        if (out.state.adam.m.size() != 3 * out.state.art.point_count() ||
            out.state.adam.v.size() != out.state.adam.m.size())
            throw ValidationError({"checkpoint optimizer state does not match its wires"});
        for (const auto& r : j.at("trace")) {
            TraceRecord rec;
            rec.iteration = r.at(0).get<int>();
            rec.view_loss = {r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
            rec.mst_budget = r.at(4).get<double>();
            rec.total = r.at(5).get<double>();
            rec.ms = r.at(6).get<double>();
            out.trace.push_back(rec);
        }
    } catch (const json::exception& e) {
        throw ValidationError({"cannot read checkpoint '" + path.string() + "': " + e.what()});
    }
    return out;
}

void write_views(const RunState& state, const OptimConfig& config, const fs::path& dir, const std::string& stem) {
    for (auto v : kAllViews)
        write_image(render_view(state.art, v, config), dir / (stem + "_" + view_name(v) + ".png"));
}

int run_impl(const fs::path& spec_path, const RunOptions& options, std::ostream& out, std::ostream& err,
             bool& bridge_mode) {
    const RunSpec spec = parse_spec(spec_path, options.overrides);
    const auto& config = spec.config;
    bridge_mode = config.mode == ProviderMode::Bridge;

    const fs::path dir = spec.output_dir;
    const fs::path snapshots = dir / "snapshots";
    fs::create_directories(snapshots);
    write_text(dir / "resolved_config.yaml", echo_spec(spec));

    auto offline = std::make_shared<OfflineProvider>(config.objective);
    std::shared_ptr<BridgeProvider> bridge;
    ViewConditions conditions;
    for (auto v : kAllViews) {
        const auto& vs = spec.views[static_cast<int>(v)];
        if (vs.target) offline->set_target(v, fit_to_canvas(read_image(*vs.target), config.canvas));
        conditions[static_cast<int>(v)].prompt = vs.prompt;
        if (vs.condition)
            conditions[static_cast<int>(v)].condition = fit_to_canvas(read_image(*vs.condition), config.canvas);
    }
    if (bridge_mode) {
        bridge = std::make_shared<BridgeProvider>(spec.bridge);
        try {
            bridge->health();
        } catch (const TransportError& e) {
            throw TransportError("bridge at " + spec.bridge.endpoint() + " is not reachable: " + e.what());
        }
    }
    const ProviderDispatch dispatch(offline, bridge);

    const fs::path checkpoint = dir / "checkpoint.json";
    RunState state;
    std::vector<TraceRecord> trace;
    if (options.resume) {
        if (!fs::exists(checkpoint))
            throw ValidationError({"--resume: no checkpoint at '" + checkpoint.string() + "'"});
        auto restored = load_checkpoint(checkpoint, spec);
        state = std::move(restored.state);
        trace = std::move(restored.trace);
        err << "resuming at iteration " << state.iteration << " of " << config.iterations << "\n";
    } else {
        state = start(config);
    }

    RunHooks hooks;
    hooks.cancelled = [] { return g_interrupted.load(); };
    hooks.deterministic_timing = options.deterministic_timing;
    hooks.on_record = [&](const TraceRecord& r) {
        trace.push_back(r);
        err << format("iter %5d  X %.5f  Y %.5f  Z %.5f  mst %.3e  total %.5f  %.1f ms\n", r.iteration,
                      r.view_loss[0], r.view_loss[1], r.view_loss[2], r.mst_budget, r.total, r.ms);
    };
    hooks.after_step = [&](const RunState& s) {
        const int every = spec.exports.snapshot_every;
        if (every > 0 && s.iteration % every == 0 && s.iteration < config.iterations) {
            write_views(s, config, snapshots, format("iter_%05d", s.iteration));
            if (spec.exports.checkpoint) save_checkpoint(checkpoint, spec, s, trace);
        }
    };

    const RunResult result = resume(std::move(state), config, dispatch, conditions, hooks);
    const RunState& final_state = result.state;

    if (spec.exports.checkpoint || result.cancelled) save_checkpoint(checkpoint, spec, final_state, trace);
    write_text(dir / "trace.csv", trace_csv(trace));
    if (result.cancelled) {
        err << "interrupted at iteration " << final_state.iteration << "; continue with --resume\n";
        return kExitInterrupted;
    }

    save_wireart({final_state.art, config.canvas, config.window}, dir / "final_wireart.json");
    if (spec.exports.svg)
        for (auto v : kAllViews)
            export_svg(project_art(final_state.art, v, config), config.canvas,
                       dir / (std::string("view_") + view_name(v) + ".svg"));
    if (spec.exports.obj) export_obj(final_state.art, spec.exports.obj_samples, dir / "wireart.obj");
    write_views(final_state, config, snapshots, "final");

    out << "finished " << final_state.iteration << " iterations; artifacts in " << dir.string() << "\n";
    if (!trace.empty()) {
        const auto& last = trace.back();
        out << format("final loss X %.5f  Y %.5f  Z %.5f  mst %.3e\n", last.view_loss[0], last.view_loss[1],
                      last.view_loss[2], last.mst_budget);
    }
    return kExitOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kExitValidation;
    if (dynamic_cast<const TransportError*>(&e)) return kExitBridge;
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    return kExitFailure;
}

void request_interrupt() { g_interrupted = true; }
void clear_interrupt() { g_interrupted = false; }

int run_command(const fs::path& spec_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    bool bridge_mode = false;
    try {
        return run_impl(spec_path, options, out, err, bridge_mode);
    } catch (const ValidationError& e) {
        err << "invalid run spec '" << spec_path.string() << "':\n";
        for (const auto& p : e.problems()) err << "  - " << p << "\n";
        return kExitValidation;
    } catch (const ContractError& e) {
        // In bridge mode the only external contract is the bridge protocol.
        err << "error: " << e.what() << "\n";
        return bridge_mode ? kExitBridge : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int export_command(const fs::path& wireart_path, const ExportOptions& options, std::ostream& out,
                   std::ostream& err) {
    try {
        if (!options.svg && !options.obj) throw ValidationError({"nothing to export: pass --svg and/or --obj"});
        if (options.obj_samples < 2) throw ValidationError({"--samples must be >= 2"});
        const WireArtFile file = load_wireart(wireart_path);
        const fs::path dir = options.out_dir ? *options.out_dir : fs::absolute(wireart_path).parent_path();
        fs::create_directories(dir);
        OptimConfig config;
        config.canvas = file.canvas;
        config.window = file.window;
        if (options.svg) {
            for (auto v : kAllViews) {
                const auto path = dir / (std::string("view_") + view_name(v) + ".svg");
                export_svg(project_art(file.art, v, config), file.canvas, path);
                out << path.string() << "\n";
            }
        }
        if (options.obj) {
            const auto path = dir / "wireart.obj";
            export_obj(file.art, options.obj_samples, path);
            out << path.string() << "\n";
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "cannot export '" << wireart_path.string() << "':\n";
        for (const auto& p : e.problems()) err << "  - " << p << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int check_command(std::ostream& out, std::ostream& err) {
    bool ok = true;
    auto line = [&](bool pass, const std::string& name, const std::string& detail) {
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    };
    try {
        const auto proj = testkit::audit_projection_equivalence(1000, 11);
        line(proj.worst < 1e-9, "projection", format("%zu samples, worst deviation %.2e", proj.samples, proj.worst));

        const auto grad = testkit::audit_raster_gradient(100, 128, 1e-3, 12);
        line(grad.failed == 0 && grad.exclusion_rate() < 0.1, "raster gradient",
             format("%zu configurations, %zu failed, %.1f%% excluded, worst relative error %.2e",
                    grad.configurations, grad.failed, 100 * grad.exclusion_rate(), grad.worst_relative_error));

        const auto mst = testkit::audit_mst_oracle(200, 7, 13);
        line(mst.mismatches == 0 && mst.not_spanning == 0, "spanning tree",
             format("%zu graphs, %zu weight mismatches, %zu non-spanning", mst.graphs, mst.mismatches,
                    mst.not_spanning));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return ok ? kExitOk : kExitFailure;
}

}  // namespace wireforge::app
