#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wireforge/adam.hpp"
#include "wireforge/connectivity.hpp"
#include "wireforge/geometry.hpp"
#include "wireforge/objectives.hpp"
#include "wireforge/rasterizer.hpp"

namespace wireforge {

struct OptimConfig {
    int n_wires = 30;
    int segments_per_wire = 5;
    Canvas canvas{};
    Window window{};

    int iterations = 2000;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double lambda = 50.0;
    double guidance_scale = 100.0;
    std::uint64_t seed = 0;

    ProviderMode mode = ProviderMode::Offline;
    OfflineObjectiveConfig objective{};
    std::array<double, 3> view_weights{1.0, 1.0, 1.0};

    /// Unset: off in offline mode, on in bridge mode.
    std::optional<bool> augment;
    int augment_draws = 2;
    AugmentParams augment_params{};

    /// Global L2 clip threshold; 0 disables. Unset: off offline, 10 in bridge mode.
    std::optional<double> clip_grad_norm;

    double init_extent = 0.65;
    double init_radius = 0.08;

    int log_every = 10;
    bool parallel_views = false;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
    bool augment_enabled() const { return augment.value_or(mode == ProviderMode::Bridge); }
    double effective_clip() const { return clip_grad_norm.value_or(mode == ProviderMode::Bridge ? 10.0 : 0.0); }

    friend bool operator==(const OptimConfig& a, const OptimConfig& b);
};

/// Per-view conditions forwarded with every gradient request.
struct ViewCondition {
    std::optional<std::string> prompt;
    std::optional<Image> condition;
};
using ViewConditions = std::array<ViewCondition, 3>;

struct TraceRecord {
    int iteration = 0;
    std::array<double, 3> view_loss{};
    double mst_budget = 0;
    double total = 0;
    double ms = 0;
};

struct RunState {
    WireArt art;
    AdamState adam;
    int iteration = 0;
    /// Number of MST gradient evaluations performed by step().
    std::int64_t mst_gradient_evaluations = 0;
};

/// Root uniform in [-extent, extent]^3, then each following control point is a
/// Gaussian (sigma = init_radius) offset from the previous one, clamped to [-1,1]^3.
WireArt initialize(const OptimConfig& config);
RunState start(const OptimConfig& config);

struct ViewEvaluation {
    double loss = 0;
    std::vector<Point3> grad;  // per control point
    Image render;
};

/// Projection, rendering, optional augmentation, objective, and backward for one view.
ViewEvaluation evaluate_view(const WireArt& art, ViewId view, const OptimConfig& config,
                             const ProviderDispatch& dispatch, const ViewConditions& conditions, int iteration);

struct GradientBreakdown {
    std::array<std::optional<ViewEvaluation>, 3> views;  // nullopt for zero-weight views
    std::optional<MstLoss> mst;                          // nullopt when lambda == 0
    std::vector<Point3> total;
};

/// Sum of view gradients plus lambda times the MST gradient, before clipping.
/// Throws NumericalError naming the view or module on non-finite values.
GradientBreakdown compute_gradient(RunState& state, const OptimConfig& config, const ProviderDispatch& dispatch,
                                   const ViewConditions& conditions);

struct StepReport {
    std::array<double, 3> view_loss{};
    std::optional<double> mst_budget;  // set when lambda > 0
    double grad_norm = 0;
};

/// One optimization step. The state is only modified after every gradient is available.
StepReport step(RunState& state, const OptimConfig& config, const ProviderDispatch& dispatch,
                const ViewConditions& conditions);

/// MST budget of the current wires (measurement only).
double mst_budget(const WireArt& art);

struct RunHooks {
    std::function<bool()> cancelled;
    std::function<void(const TraceRecord&)> on_record;
    std::function<void(const RunState&)> after_step;
    int max_retries = 5;
    double backoff_seconds = 0.5;
    /// Zero the timing column so traces are byte-comparable.
    bool deterministic_timing = false;
};

struct RunResult {
    RunState state;
    std::vector<TraceRecord> trace;
    bool cancelled = false;
};

RunResult run(const OptimConfig& config, const ProviderDispatch& dispatch, const ViewConditions& conditions,
              const RunHooks& hooks = {});
/// Continues from an existing state until config.iterations steps have been taken.
RunResult resume(RunState state, const OptimConfig& config, const ProviderDispatch& dispatch,
                 const ViewConditions& conditions, const RunHooks& hooks = {});

/// Projects every wire into pixel space for one view.
std::vector<Chain2> project_art(const WireArt& art, ViewId view, const OptimConfig& config);
Image render_view(const WireArt& art, ViewId view, const OptimConfig& config);

}  // namespace wireforge
