#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "wireforge/app/commands.hpp"

namespace wireforge::app {

namespace {

extern "C" void on_sigint(int) { request_interrupt(); }

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"wireforge: optimize 3D wire sculptures whose shadows match three drawings"};
    app.require_subcommand(1);

    std::string spec_path;
    RunOptions run_opts;
    std::uint64_t seed = 0;
    double lambda = 0;
    int iterations = 0;
    std::string out_dir, mode;
    auto* run = app.add_subcommand("run", "Optimize wires from a YAML run spec");
    run->add_option("spec", spec_path, "Run spec (YAML)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override run.seed");
    auto* lambda_opt = run->add_option("--lambda", lambda, "Override optimizer.lambda");
    auto* iter_opt = run->add_option("--iterations", iterations, "Override run.iterations");
    auto* out_opt = run->add_option("--out", out_dir, "Override run.output");
    auto* mode_opt = run->add_option("--mode", mode, "Override run.mode")->check(CLI::IsMember({"offline", "bridge"}));
    run->add_flag("--resume", run_opts.resume, "Continue from <output>/checkpoint.json");
    run->add_flag("--deterministic-trace", run_opts.deterministic_timing, "Write 0 in the trace timing column");

    std::string wireart_path;
    ExportOptions export_opts;
    std::string export_out;
    auto* exp = app.add_subcommand("export", "Export SVG views or an OBJ model from final_wireart.json");
    exp->add_option("wireart", wireart_path, "Saved wireart JSON")->required();
    exp->add_flag("--svg", export_opts.svg, "Write view_X/Y/Z.svg");
    exp->add_flag("--obj", export_opts.obj, "Write wireart.obj");
    auto* exp_out = exp->add_option("--out", export_out, "Output directory (default: next to the input)");
    exp->add_option("--samples", export_opts.obj_samples, "OBJ polyline samples per segment");

    auto* check = app.add_subcommand("check", "Run quick numerical self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (run->parsed()) {
        auto& o = run_opts.overrides;
        if (*seed_opt) o.seed = seed;
        if (*lambda_opt) o.lambda = lambda;
        if (*iter_opt) o.iterations = iterations;
        if (*out_opt) o.output_dir = out_dir;
        if (*mode_opt) o.mode = mode;
        std::signal(SIGINT, on_sigint);
        return run_command(spec_path, run_opts, std::cout, std::cerr);
    }
    if (exp->parsed()) {
        if (*exp_out) export_opts.out_dir = export_out;
        return export_command(wireart_path, export_opts, std::cout, std::cerr);
    }
    if (check->parsed()) return check_command(std::cout, std::cerr);
    return kExitFailure;
}

}  // namespace wireforge::app
