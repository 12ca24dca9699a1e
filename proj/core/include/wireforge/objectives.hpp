#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wireforge/geometry.hpp"
#include "wireforge/image.hpp"

namespace wireforge {

struct ObjectiveResult {
    double loss = 0;
    Image grad;  // dL/dpixel
};

ObjectiveResult mse_objective(const Image& rendered, const Image& target);

/// Precomputed pieces of the chamfer objective for one target: binarized ink
/// mask (pixel < 0.5), its Euclidean distance transform in pixels, and the
/// blurred ink mask.
class ChamferTarget {
public:
    /// Throws Error("empty target") if the target has no ink.
    ChamferTarget(const Image& target, double blur_sigma);

    const Image& ink() const { return ink_; }
    const Image& distance() const { return distance_; }
    const Image& blurred_ink() const { return blurred_ink_; }
    double blur_sigma() const { return sigma_; }

    /// mean(ink * DT) + coverage_weight * mean(T * max(0, blur(T) - blur(ink))^2).
    ObjectiveResult evaluate(const Image& rendered, double coverage_weight = 1.0) const;

private:
    Image ink_;
    Image distance_;
    Image blurred_ink_;
    double sigma_;
};

ObjectiveResult chamfer_objective(const Image& rendered, const Image& target, double blur_sigma);

/// Zero-padded separable Gaussian; symmetric, so it is its own adjoint.
Image gaussian_blur(const Image& img, double sigma);

struct AugmentParams {
    double distortion = 0.5;
    std::array<double, 2> crop_scale{0.7, 1.0};
    std::array<double, 2> crop_ratio{3.0 / 4.0, 4.0 / 3.0};

    void validate() const;
    static AugmentParams identity() { return {0.0, {1.0, 1.0}, {1.0, 1.0}}; }
};

/// A sampled perspective-then-resized-crop warp, stored as bilinear taps.
/// Operates on ink (1 - pixel) so out-of-frame samples read as white paper.
class Warp {
public:
    struct Tap {
        std::uint32_t src;
        double weight;
    };

    static Warp sample(int width, int height, const AugmentParams& params, std::mt19937_64& rng);
    /// Output pixel (x, y) reads the input at homography(x + .5, y + .5) (pixel-center convention).
    static Warp from_homography(int width, int height, const std::array<double, 9>& out_to_in);

    Image apply(const Image& image) const;
    /// Adjoint of the linear part: dL/dinput from dL/doutput.
    Image adjoint(const Image& upstream) const;

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<std::vector<Tap>>& taps() const { return taps_; }

private:
    int width_ = 0, height_ = 0;
    std::vector<std::vector<Tap>> taps_;
};

struct Augmented {
    Image image;
    std::function<Image(const Image&)> backward;
};

Augmented augment(const Image& image, const AugmentParams& params, std::mt19937_64& rng);

struct GradientRequest {
    ViewId view = ViewId::X;
    Image rendered;
    std::optional<std::string> prompt;
    std::optional<Image> condition;
    int iteration = 0;
    int total_iterations = 1;
    /// Augmentation applied to `rendered`; offline targets are warped to match.
    std::shared_ptr<const Warp> warp;
};

/// Source of per-pixel gradients for one view.
class GradientProvider {
public:
    virtual ~GradientProvider() = default;
    virtual ObjectiveResult evaluate(const GradientRequest& request) = 0;
};

enum class ObjectiveKind { Mse, Chamfer, Scheduled };
const char* to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

struct OfflineObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::Scheduled;
    /// Scheduled: chamfer only before this fraction of the run, then the blend.
    double chamfer_fraction = 0.6;
    double blend_mse_weight = 1.0;
    double blend_chamfer_weight = 1.0;
    double blur_sigma = 4.0;
    double coverage_weight = 500.0;

    friend bool operator==(const OfflineObjectiveConfig&, const OfflineObjectiveConfig&) = default;
};

/// Image-matching provider against registered per-view targets.
class OfflineProvider : public GradientProvider {
public:
    explicit OfflineProvider(OfflineObjectiveConfig config = {});

    void set_target(ViewId view, const Image& target);
    bool has_target(ViewId view) const { return targets_[static_cast<int>(view)].has_value(); }
    const Image& target(ViewId view) const;
    const OfflineObjectiveConfig& config() const { return config_; }

    ObjectiveResult evaluate(const GradientRequest& request) override;
    /// Evaluates a fixed objective kind regardless of the schedule.
    ObjectiveResult evaluate_kind(ViewId view, const Image& rendered, ObjectiveKind kind) const;

private:
    struct Entry {
        Image image;
        std::shared_ptr<const ChamferTarget> chamfer;
    };
    OfflineObjectiveConfig config_;
    std::array<std::optional<Entry>, 3> targets_;
};

enum class ProviderMode { Offline, Bridge };
const char* to_string(ProviderMode mode);
ProviderMode provider_mode_from_string(const std::string& s);

/// Routes a request to the offline objectives or the bridge.
class ProviderDispatch {
public:
    ProviderDispatch(std::shared_ptr<GradientProvider> offline, std::shared_ptr<GradientProvider> bridge)
        : offline_(std::move(offline)), bridge_(std::move(bridge)) {}

    ObjectiveResult operator()(const GradientRequest& request, ProviderMode mode) const;

private:
    std::shared_ptr<GradientProvider> offline_;
    std::shared_ptr<GradientProvider> bridge_;
};

}  // namespace wireforge
