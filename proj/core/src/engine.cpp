#include "wireforge/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>
#include <thread>

#include "wireforge/errors.hpp"

namespace wireforge {

namespace {

bool all_finite(std::span<const Point3> v) {
    return std::all_of(v.begin(), v.end(), [](const Point3& p) { return is_finite(p); });
}

std::mt19937_64 view_rng(std::uint64_t seed, int iteration, ViewId view) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(view), 0x5eedu};
    return std::mt19937_64(seq);
}

}  // namespace

void OptimConfig::validate() const {
    if (n_wires < 1) throw ConfigError("n_wires must be >= 1");
    if (segments_per_wire < 1) throw ConfigError("segments_per_wire must be >= 1");
    canvas.validate();
    if (window.scale == 0.0 || !std::isfinite(window.scale)) throw ConfigError("window scale must be non-zero");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must lie in [0,1)");
    if (!(adam_epsilon > 0)) throw ConfigError("adam epsilon must be > 0");
    if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
    for (double w : view_weights)
        if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("view weights must be finite and >= 0");
    if (augment_draws < 1) throw ConfigError("augment_draws must be >= 1");
    augment_params.validate();
    if (clip_grad_norm && !(*clip_grad_norm >= 0)) throw ConfigError("clip_grad_norm must be >= 0");
    if (!(init_extent >= 0 && init_extent <= 1)) throw ConfigError("init_extent must lie in [0,1]");
    if (!(init_radius >= 0)) throw ConfigError("init_radius must be >= 0");
    if (log_every < 1) throw ConfigError("log_every must be >= 1");
}

bool operator==(const OptimConfig& a, const OptimConfig& b) {
    auto canvas_eq = [](const Canvas& x, const Canvas& y) {
        return x.width == y.width && x.height == y.height && x.stroke_width == y.stroke_width &&
               x.aa_width == y.aa_width && x.samples_per_segment == y.samples_per_segment;
    };
    auto augment_eq = [](const AugmentParams& x, const AugmentParams& y) {
        return x.distortion == y.distortion && x.crop_scale == y.crop_scale && x.crop_ratio == y.crop_ratio;
    };
    return a.n_wires == b.n_wires && a.segments_per_wire == b.segments_per_wire && canvas_eq(a.canvas, b.canvas) &&
           a.window.scale == b.window.scale && a.window.center == b.window.center && a.iterations == b.iterations &&
           a.learning_rate == b.learning_rate && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
           a.adam_epsilon == b.adam_epsilon && a.lambda == b.lambda && a.guidance_scale == b.guidance_scale &&
           a.seed == b.seed && a.mode == b.mode && a.objective == b.objective && a.view_weights == b.view_weights &&
           a.augment == b.augment && a.augment_draws == b.augment_draws &&
           augment_eq(a.augment_params, b.augment_params) && a.clip_grad_norm == b.clip_grad_norm &&
           a.init_extent == b.init_extent && a.init_radius == b.init_radius && a.log_every == b.log_every &&
           a.parallel_views == b.parallel_views;
}

WireArt initialize(const OptimConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> root(-config.init_extent, config.init_extent);
    std::normal_distribution<double> offset(0.0, config.init_radius);
    auto clamp = [](double v) { return std::clamp(v, -1.0, 1.0); };

    WireArt art;
    std::vector<Point3> pts(3 * static_cast<std::size_t>(config.segments_per_wire) + 1);
    for (int w = 0; w < config.n_wires; ++w) {
        pts[0] = {root(rng), root(rng), root(rng)};
        for (std::size_t k = 1; k < pts.size(); ++k) {
            const double dx = offset(rng), dy = offset(rng), dz = offset(rng);
            pts[k] = {clamp(pts[k - 1].x + dx), clamp(pts[k - 1].y + dy), clamp(pts[k - 1].z + dz)};
        }
        art.add_wire(pts, w);
    }
    return art;
}

RunState start(const OptimConfig& config) {
    RunState s;
    s.art = initialize(config);
    s.adam = AdamState(s.art.point_count(), config.beta1, config.beta2, config.adam_epsilon);
    return s;
}

std::vector<Chain2> project_art(const WireArt& art, ViewId view, const OptimConfig& config) {
    const auto map = pixel_map(ViewPlane::axis(view), config.window, config.canvas);
    std::vector<Chain2> chains(art.wire_count());
    for (std::size_t w = 0; w < art.wire_count(); ++w) {
        const auto pts = art.wire_points(w);
        chains[w].points.reserve(pts.size());
        for (const auto& p : pts) chains[w].points.push_back(map.apply(p));
    }
    return chains;
}

Image render_view(const WireArt& art, ViewId view, const OptimConfig& config) {
    auto img = render(project_art(art, view, config), config.canvas);
    img.view = view;
    return img;
}

ViewEvaluation evaluate_view(const WireArt& art, ViewId view, const OptimConfig& config,
                             const ProviderDispatch& dispatch, const ViewConditions& conditions, int iteration) {
    const double weight = config.view_weights[static_cast<int>(view)];
    const auto map = pixel_map(ViewPlane::axis(view), config.window, config.canvas);
    const auto chains = project_art(art, view, config);
    const RasterPass pass(chains, config.canvas);

    ViewEvaluation out;
    out.render = pass.image();
    out.render.view = view;

    GradientRequest request;
    request.view = view;
    request.prompt = conditions[static_cast<int>(view)].prompt;
    request.condition = conditions[static_cast<int>(view)].condition;
    request.iteration = iteration;
    request.total_iterations = std::max(1, config.iterations);

    Image upstream(config.canvas.width, config.canvas.height, 0.0);
    if (config.augment_enabled()) {
        auto rng = view_rng(config.seed, iteration, view);
        const double inv = 1.0 / config.augment_draws;
        for (int d = 0; d < config.augment_draws; ++d) {
            auto warp = std::make_shared<const Warp>(Warp::sample(out.render.width, out.render.height,
                                                                  config.augment_params, rng));
            request.rendered = warp->apply(out.render);
            request.warp = warp;
            const auto res = dispatch(request, config.mode);
            const auto back = warp->adjoint(res.grad);
            out.loss += inv * res.loss;
            for (std::size_t i = 0; i < upstream.size(); ++i) upstream.data[i] += inv * back.data[i];
        }
    } else {
        request.rendered = out.render;
        auto res = dispatch(request, config.mode);
        out.loss = res.loss;
        upstream = std::move(res.grad);
    }

    if (!std::isfinite(out.loss)) throw NumericalError(std::string("non-finite loss from objective in view ") + view_name(view));
    for (double& g : upstream.data) {
        if (!std::isfinite(g))
            throw NumericalError(std::string("non-finite pixel gradient from objective in view ") + view_name(view));
        g *= weight;
    }
    out.loss *= weight;

    const auto g2 = pass.backward(upstream);
    out.grad.reserve(art.point_count());
    for (const auto& chain_grad : g2)
        for (const auto& g : chain_grad) out.grad.push_back(map.transpose_apply(g));
    if (!all_finite(out.grad))
        throw NumericalError(std::string("non-finite control-point gradient from rasterizer in view ") + view_name(view));
    return out;
}

GradientBreakdown compute_gradient(RunState& state, const OptimConfig& config, const ProviderDispatch& dispatch,
                                   const ViewConditions& conditions) {
    const WireArt& art = state.art;
    GradientBreakdown out;

    std::array<std::future<ViewEvaluation>, 3> pending;
    for (auto view : kAllViews) {
        const int v = static_cast<int>(view);
        if (config.view_weights[v] == 0.0) continue;
        const auto policy = config.parallel_views ? std::launch::async : std::launch::deferred;
        pending[v] = std::async(policy, [&, view] {
            return evaluate_view(art, view, config, dispatch, conditions, state.iteration);
        });
    }
    for (int v = 0; v < 3; ++v)
        if (pending[v].valid()) out.views[v] = pending[v].get();

    out.total.assign(art.point_count(), Point3{});
    for (const auto& view : out.views) {
        if (!view) continue;
        for (std::size_t i = 0; i < out.total.size(); ++i) out.total[i] += view->grad[i];
    }
    if (config.lambda > 0) {
        out.mst = mst_loss_and_grad(art);
        ++state.mst_gradient_evaluations;
        if (!all_finite(out.mst->grad)) throw NumericalError("non-finite gradient from connectivity (MST)");
        for (std::size_t i = 0; i < out.total.size(); ++i) out.total[i] += config.lambda * out.mst->grad[i];
    }
    return out;
}

StepReport step(RunState& state, const OptimConfig& config, const ProviderDispatch& dispatch,
                const ViewConditions& conditions) {
    auto breakdown = compute_gradient(state, config, dispatch, conditions);
    StepReport report;
    for (int v = 0; v < 3; ++v)
        if (breakdown.views[v]) report.view_loss[v] = breakdown.views[v]->loss;
    if (breakdown.mst) report.mst_budget = breakdown.mst->loss;

    double sq = 0;
    for (const auto& g : breakdown.total) sq += squared_norm(g);
    report.grad_norm = std::sqrt(sq);
    if (!std::isfinite(report.grad_norm)) throw NumericalError("non-finite total gradient");

    const double clip = config.effective_clip();
    if (clip > 0 && report.grad_norm > clip) {
        const double s = clip / report.grad_norm;
        for (auto& g : breakdown.total) g *= s;
    }
    adam_update(state.adam, state.art.all_points(), breakdown.total, config.learning_rate);
    ++state.iteration;
    return report;
}

double mst_budget(const WireArt& art) {
    if (art.wire_count() == 0) return 0.0;
    return prim_mst(WireGraph(art)).total_weight;
}

RunResult run(const OptimConfig& config, const ProviderDispatch& dispatch, const ViewConditions& conditions,
              const RunHooks& hooks) {
    config.validate();
    return resume(start(config), config, dispatch, conditions, hooks);
}

RunResult resume(RunState state, const OptimConfig& config, const ProviderDispatch& dispatch,
                 const ViewConditions& conditions, const RunHooks& hooks) {
    config.validate();
    RunResult result;
    result.state = std::move(state);
    auto& s = result.state;

    while (s.iteration < config.iterations) {
        if (hooks.cancelled && hooks.cancelled()) {
            result.cancelled = true;
            break;
        }
        const int it = s.iteration;
        const bool logged = it % config.log_every == 0 || it == config.iterations - 1;
        // With lambda == 0 the budget is only measured for the trace, before the update.
        std::optional<double> measured;
        if (logged && config.lambda == 0) measured = mst_budget(s.art);

        const auto t0 = std::chrono::steady_clock::now();
        StepReport report;
        for (int attempt = 0;; ++attempt) {
            try {
                report = step(s, config, dispatch, conditions);
                break;
            } catch (const TransportError&) {
                if (attempt >= hooks.max_retries) throw;
                const double wait = hooks.backoff_seconds * std::pow(2.0, attempt);
                std::this_thread::sleep_for(std::chrono::duration<double>(wait));
            }
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        if (logged) {
            TraceRecord rec;
            rec.iteration = it;
            rec.view_loss = report.view_loss;
            rec.mst_budget = report.mst_budget ? *report.mst_budget : *measured;
            rec.total = rec.view_loss[0] + rec.view_loss[1] + rec.view_loss[2] + config.lambda * rec.mst_budget;
            rec.ms = hooks.deterministic_timing ? 0.0 : ms;
            result.trace.push_back(rec);
            if (hooks.on_record) hooks.on_record(rec);
        }
        if (hooks.after_step) hooks.after_step(s);
    }
    return result;
}

}  // namespace wireforge
