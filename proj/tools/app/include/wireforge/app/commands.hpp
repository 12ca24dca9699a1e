#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wireforge/app/run_spec.hpp"

namespace wireforge::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitValidation = 2,
    kExitBridge = 3,
    kExitNumerical = 4,
    kExitInterrupted = 130,
};

/// Maps an exception escaping a command to the process exit code.
int exit_code_for(const std::exception& e);

struct RunOptions {
    Overrides overrides;
    /// Continue from <output>/checkpoint.json when it exists.
    bool resume = false;
    /// Zero the trace timing column so repeated runs are byte-identical.
    bool deterministic_timing = false;
};

/// Optimizes the wires described by a run spec and writes every artifact into
/// the output directory. Returns an ExitCode.
int run_command(const std::filesystem::path& spec_path, const RunOptions& options, std::ostream& out,
                std::ostream& err);

struct ExportOptions {
    bool svg = false;
    bool obj = false;
    std::optional<std::filesystem::path> out_dir;  // default: next to the input
    int obj_samples = 16;
};

/// Re-exports SVG views and/or an OBJ polyline model from a saved wireart file.
int export_command(const std::filesystem::path& wireart_path, const ExportOptions& options, std::ostream& out,
                   std::ostream& err);

/// Quick randomized self-checks of projection, rasterizer gradients and MST.
/// Prints one PASS/FAIL line per check.
int check_command(std::ostream& out, std::ostream& err);

/// Sets the flag polled by run_command between steps (used by the SIGINT handler).
void request_interrupt();
void clear_interrupt();

/// Command-line entry point.
int main_entry(int argc, char** argv);

}  // namespace wireforge::app
