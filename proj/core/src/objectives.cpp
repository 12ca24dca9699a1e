#include "wireforge/objectives.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "wireforge/errors.hpp"

namespace wireforge {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw ContractError(std::string(what) + ": image is " + std::to_string(a.width) + "x" +
                            std::to_string(a.height) + ", target is " + std::to_string(b.width) + "x" +
                            std::to_string(b.height));
}

cv::Mat wrap(Image& img) { return cv::Mat(img.height, img.width, CV_64F, img.data.data()); }

}  // namespace

ObjectiveResult mse_objective(const Image& rendered, const Image& target) {
    require_same_shape(rendered, target, "mse_objective");
    const double n = static_cast<double>(rendered.size());
    ObjectiveResult out{0.0, Image(rendered.width, rendered.height)};
    out.grad.view = rendered.view;
    double sum = 0;
    for (std::size_t i = 0; i < rendered.size(); ++i) {
        const double d = rendered.data[i] - target.data[i];
        sum += d * d;
        out.grad.data[i] = 2.0 * d / n;
    }
    out.loss = sum / n;
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (!(sigma > 0)) throw ConfigError("blur sigma must be positive");
    Image src = img;
    Image out(img.width, img.height);
    out.view = img.view;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int ksize = 2 * radius + 1;
    cv::Mat dst = wrap(out);
    cv::GaussianBlur(wrap(src), dst, cv::Size(ksize, ksize), sigma, sigma, cv::BORDER_CONSTANT);
    return out;
}

ChamferTarget::ChamferTarget(const Image& target, double blur_sigma) : sigma_(blur_sigma) {
    if (!(blur_sigma > 0)) throw ConfigError("blur_sigma must be positive");
    ink_ = Image(target.width, target.height);
    cv::Mat background(target.height, target.width, CV_8UC1);
    bool any_ink = false;
    for (int y = 0; y < target.height; ++y) {
        for (int x = 0; x < target.width; ++x) {
            const bool ink = target.at(x, y) < 0.5;
            any_ink = any_ink || ink;
            ink_.at(x, y) = ink ? 1.0 : 0.0;
            background.at<unsigned char>(y, x) = ink ? 0 : 255;
        }
    }
    if (!any_ink) throw Error("empty target");
    cv::Mat dt;
    cv::distanceTransform(background, dt, cv::DIST_L2, cv::DIST_MASK_PRECISE, CV_32F);
    distance_ = Image(target.width, target.height);
    for (int y = 0; y < target.height; ++y)
        for (int x = 0; x < target.width; ++x) distance_.at(x, y) = dt.at<float>(y, x);
    blurred_ink_ = gaussian_blur(ink_, blur_sigma);
}

ObjectiveResult ChamferTarget::evaluate(const Image& rendered, double coverage_weight) const {
    require_same_shape(rendered, ink_, "chamfer_objective");
    const double n = static_cast<double>(rendered.size());
    Image ink(rendered.width, rendered.height);
    for (std::size_t i = 0; i < ink.size(); ++i) ink.data[i] = 1.0 - rendered.data[i];

    double far_ink = 0;
    for (std::size_t i = 0; i < ink.size(); ++i) far_ink += ink.data[i] * distance_.data[i];

    const Image blurred = gaussian_blur(ink, sigma_);
    Image residual(rendered.width, rendered.height);
    double deficit = 0;
    for (std::size_t i = 0; i < ink.size(); ++i) {
        const double r = std::max(0.0, blurred_ink_.data[i] - blurred.data[i]);
        deficit += ink_.data[i] * r * r;
        residual.data[i] = ink_.data[i] * r;
    }
    const Image pulled = gaussian_blur(residual, sigma_);

    ObjectiveResult out{(far_ink + coverage_weight * deficit) / n, Image(rendered.width, rendered.height)};
    out.grad.view = rendered.view;
    for (std::size_t i = 0; i < ink.size(); ++i)
        out.grad.data[i] = (-distance_.data[i] + 2.0 * coverage_weight * pulled.data[i]) / n;
    return out;
}

ObjectiveResult chamfer_objective(const Image& rendered, const Image& target, double blur_sigma) {
    require_same_shape(rendered, target, "chamfer_objective");
    return ChamferTarget(target, blur_sigma).evaluate(rendered);
}

void AugmentParams::validate() const {
    if (!(distortion >= 0 && distortion <= 1)) throw ConfigError("augment distortion must lie in [0,1]");
    if (!(crop_scale[0] > 0 && crop_scale[0] <= crop_scale[1] && crop_scale[1] <= 1))
        throw ConfigError("augment crop scale must satisfy 0 < lo <= hi <= 1");
    if (!(crop_ratio[0] > 0 && crop_ratio[0] <= crop_ratio[1]))
        throw ConfigError("augment crop ratio must satisfy 0 < lo <= hi");
}

Warp Warp::from_homography(int width, int height, const std::array<double, 9>& m) {
    Warp w;
    w.width_ = width;
    w.height_ = height;
    w.taps_.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double hu = m[0] * px + m[1] * py + m[2];
            const double hv = m[3] * px + m[4] * py + m[5];
            const double hw = m[6] * px + m[7] * py + m[8];
            if (!(hw > 1e-12) || !std::isfinite(hu) || !std::isfinite(hv))
                throw DomainError("degenerate homography");
            const double fx = hu / hw - 0.5, fy = hv / hw - 0.5;
            if (std::abs(fx) > 1e7 || std::abs(fy) > 1e7) throw DomainError("degenerate homography");
            const double ix = std::floor(fx), iy = std::floor(fy);
            const double ax = fx - ix, ay = fy - iy;
            auto& taps = w.taps_[static_cast<std::size_t>(y) * width + x];
            const double wx[2] = {1 - ax, ax}, wy[2] = {1 - ay, ay};
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const double weight = wx[dx] * wy[dy];
                    const long sx = static_cast<long>(ix) + dx, sy = static_cast<long>(iy) + dy;
                    if (weight == 0.0 || sx < 0 || sy < 0 || sx >= width || sy >= height) continue;
                    taps.push_back({static_cast<std::uint32_t>(sy * width + sx), weight});
                }
            }
        }
    }
    return w;
}

Warp Warp::sample(int width, int height, const AugmentParams& params, std::mt19937_64& rng) {
    params.validate();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double W = width, H = height;

    for (int attempt = 0; attempt < 100; ++attempt) {
        // Perspective: each output corner moves inward by up to distortion * half extent
        // and shows the matching input corner.
        cv::Matx33d persp = cv::Matx33d::eye();
        if (params.distortion > 0) {
            const double dx = params.distortion * W / 2, dy = params.distortion * H / 2;
            const cv::Point2f in[4] = {{0.f, 0.f}, {float(W), 0.f}, {float(W), float(H)}, {0.f, float(H)}};
            const cv::Point2f out[4] = {
                {float(unit(rng) * dx), float(unit(rng) * dy)},
                {float(W - unit(rng) * dx), float(unit(rng) * dy)},
                {float(W - unit(rng) * dx), float(H - unit(rng) * dy)},
                {float(unit(rng) * dx), float(H - unit(rng) * dy)},
            };
            persp = cv::Matx33d(cv::getPerspectiveTransform(out, in, cv::DECOMP_LU));
        }

        // Resized crop of the perspective output.
        double cw = W, ch = H, x0 = 0, y0 = 0;
        bool cropped = false;
        for (int tries = 0; tries < 10 && !cropped; ++tries) {
            const double area = W * H * (params.crop_scale[0] + unit(rng) * (params.crop_scale[1] - params.crop_scale[0]));
            const double lr0 = std::log(params.crop_ratio[0]), lr1 = std::log(params.crop_ratio[1]);
            const double aspect = std::exp(lr0 + unit(rng) * (lr1 - lr0));
            const double w = std::sqrt(area * aspect), h = std::sqrt(area / aspect);
            if (w > 0 && w <= W && h > 0 && h <= H) {
                cw = w;
                ch = h;
                x0 = unit(rng) * (W - w);
                y0 = unit(rng) * (H - h);
                cropped = true;
            }
        }
        if (!cropped) {
            const double ratio = std::clamp(W / H, params.crop_ratio[0], params.crop_ratio[1]);
            cw = std::min(W, H * ratio);
            ch = cw / ratio;
            x0 = (W - cw) / 2;
            y0 = (H - ch) / 2;
        }
        const cv::Matx33d crop(cw / W, 0, x0, 0, ch / H, y0, 0, 0, 1);
        const cv::Matx33d m = persp * crop;
        if (!std::isfinite(cv::determinant(m)) || std::abs(cv::determinant(m)) < 1e-12) continue;
        std::array<double, 9> flat;
        for (int i = 0; i < 9; ++i) flat[i] = m.val[i];
        try {
            return from_homography(width, height, flat);
        } catch (const DomainError&) {
            continue;
        }
    }
    return from_homography(width, height, {1, 0, 0, 0, 1, 0, 0, 0, 1});
}

Image Warp::apply(const Image& image) const {
    if (image.width != width_ || image.height != height_) throw ContractError("warp size mismatch");
    Image out(width_, height_, 1.0);
    out.view = image.view;
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        // 1 - sum w (1 - p), arranged so a single unit tap copies p exactly.
        double covered = 0, value = 0;
        for (const auto& t : taps_[i]) {
            covered += t.weight;
            value += t.weight * image.data[t.src];
        }
        out.data[i] = (1.0 - covered) + value;
    }
    return out;
}

Image Warp::adjoint(const Image& upstream) const {
    if (upstream.width != width_ || upstream.height != height_) throw ContractError("warp size mismatch");
    Image out(width_, height_, 0.0);
    out.view = upstream.view;
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const double g = upstream.data[i];
        if (g == 0.0) continue;
        for (const auto& t : taps_[i]) out.data[t.src] += t.weight * g;
    }
    return out;
}

Augmented augment(const Image& image, const AugmentParams& params, std::mt19937_64& rng) {
    auto warp = std::make_shared<Warp>(Warp::sample(image.width, image.height, params, rng));
    Augmented out{warp->apply(image), {}};
    out.backward = [warp](const Image& upstream) { return warp->adjoint(upstream); };
    return out;
}

const char* to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::Mse: return "mse";
        case ObjectiveKind::Chamfer: return "chamfer";
        case ObjectiveKind::Scheduled: return "scheduled";
    }
    return "?";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "mse") return ObjectiveKind::Mse;
    if (s == "chamfer") return ObjectiveKind::Chamfer;
    if (s == "scheduled") return ObjectiveKind::Scheduled;
    throw ConfigError("unknown objective '" + s + "' (expected mse, chamfer or scheduled)");
}

OfflineProvider::OfflineProvider(OfflineObjectiveConfig config) : config_(config) {
    if (!(config_.blur_sigma > 0)) throw ConfigError("blur_sigma must be positive");
    if (!(config_.chamfer_fraction >= 0 && config_.chamfer_fraction <= 1))
        throw ConfigError("chamfer_fraction must lie in [0,1]");
}

void OfflineProvider::set_target(ViewId view, const Image& target) {
    Entry e{target, std::make_shared<ChamferTarget>(target, config_.blur_sigma)};
    e.image.view = view;
    targets_[static_cast<int>(view)] = std::move(e);
}

const Image& OfflineProvider::target(ViewId view) const {
    const auto& e = targets_[static_cast<int>(view)];
    if (!e) throw ContractError(std::string("no target registered for view ") + view_name(view));
    return e->image;
}

ObjectiveResult OfflineProvider::evaluate_kind(ViewId view, const Image& rendered, ObjectiveKind kind) const {
    const auto& e = targets_[static_cast<int>(view)];
    if (!e) throw ContractError(std::string("no target registered for view ") + view_name(view));
    switch (kind) {
        case ObjectiveKind::Mse: return mse_objective(rendered, e->image);
        case ObjectiveKind::Chamfer: return e->chamfer->evaluate(rendered, config_.coverage_weight);
        case ObjectiveKind::Scheduled: break;
    }
    auto mse = mse_objective(rendered, e->image);
    auto ch = e->chamfer->evaluate(rendered, config_.coverage_weight);
    ObjectiveResult out{config_.blend_mse_weight * mse.loss + config_.blend_chamfer_weight * ch.loss, std::move(mse.grad)};
    for (std::size_t i = 0; i < out.grad.size(); ++i)
        out.grad.data[i] = config_.blend_mse_weight * out.grad.data[i] + config_.blend_chamfer_weight * ch.grad.data[i];
    return out;
}

ObjectiveResult OfflineProvider::evaluate(const GradientRequest& request) {
    ObjectiveKind kind = config_.kind;
    if (kind == ObjectiveKind::Scheduled && request.iteration < config_.chamfer_fraction * request.total_iterations)
        kind = ObjectiveKind::Chamfer;
    if (!request.warp) return evaluate_kind(request.view, request.rendered, kind);

    OfflineProvider warped(config_);
    warped.set_target(request.view, request.warp->apply(target(request.view)));
    return warped.evaluate_kind(request.view, request.rendered, kind);
}

const char* to_string(ProviderMode mode) { return mode == ProviderMode::Offline ? "offline" : "bridge"; }

ProviderMode provider_mode_from_string(const std::string& s) {
    if (s == "offline") return ProviderMode::Offline;
    if (s == "bridge") return ProviderMode::Bridge;
    throw ConfigError("unknown mode '" + s + "' (expected offline or bridge)");
}

ObjectiveResult ProviderDispatch::operator()(const GradientRequest& request, ProviderMode mode) const {
    auto& provider = mode == ProviderMode::Offline ? offline_ : bridge_;
    if (!provider) throw ConfigError(std::string("no ") + to_string(mode) + " gradient provider configured");
    auto result = provider->evaluate(request);
    if (!result.grad.same_shape(request.rendered))
        throw ContractError("gradient provider returned a gradient of the wrong size");
    return result;
}

}  // namespace wireforge
