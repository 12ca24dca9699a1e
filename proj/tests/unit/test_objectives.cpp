#include <doctest.h>

#include <cmath>
#include <random>

#include <wireforge/errors.hpp>
#include <wireforge/objectives.hpp>
#include <wireforge/testkit/glyphs.hpp>
#include <wireforge/testkit/oracles.hpp>

using namespace wireforge;

namespace {

double inner(const Image& a, const Image& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

// Central difference of loss(img) with respect to pixel i.
template <typename F>
double pixel_fd(F&& loss, Image img, std::size_t i, double h) {
    const double v = img.data[i];
    img.data[i] = v + h;
    const double lp = loss(img);
    img.data[i] = v - h;
    const double lm = loss(img);
    return (lp - lm) / (2 * h);
}

Image column_target(int size, int column) {
    Image t(size, size, 1.0);
    for (int y = 0; y < size; ++y) t.at(column, y) = 0.0;
    return t;
}

}  // namespace

TEST_CASE("mse examples") {
    std::mt19937_64 rng(1);
    const auto img = testkit::random_image(24, 24, rng);
    const auto same = mse_objective(img, img);
    CHECK(same.loss == 0.0);
    for (double g : same.grad.data) CHECK(g == 0.0);
    CHECK(mse_objective(Image(16, 16, 1.0), Image(16, 16, 0.0)).loss == 1.0);
    CHECK_THROWS_AS(mse_objective(Image(16, 16), Image(16, 17)), ContractError);
}

TEST_CASE("mse gradient matches finite differences") {
    std::mt19937_64 rng(2);
    const auto a = testkit::random_image(20, 20, rng), b = testkit::random_image(20, 20, rng);
    const auto res = mse_objective(a, b);
    auto loss = [&](const Image& x) { return mse_objective(x, b).loss; };
    for (std::size_t i = 0; i < a.size(); i += 13) CHECK(std::abs(pixel_fd(loss, a, i, 1e-4) - res.grad.data[i]) < 1e-8);
}

TEST_CASE("mse has its unique minimum at the target") {
    std::mt19937_64 rng(3);
    const auto t = testkit::random_image(16, 16, rng);
    for (int i = 0; i < 20; ++i) {
        auto x = testkit::random_image(16, 16, rng);
        CHECK(mse_objective(x, t).loss > 0.0);
    }
}

TEST_CASE("chamfer examples") {
    const auto target = testkit::glyph_target('X', 64, 3.0);
    CHECK(chamfer_objective(target, target, 2.0).loss == 0.0);

    const auto line = column_target(32, 10);
    Image rendered(32, 32, 1.0);
    rendered.at(15, 7) = 0.0;  // distance 5 from the target column
    const ChamferTarget ct(line, 2.0);
    CHECK(ct.distance().at(15, 7) == 5.0);
    CHECK(ct.evaluate(rendered, 0.0).loss == doctest::Approx(5.0 / (32 * 32)).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(ChamferTarget(Image(32, 32, 1.0), 2.0), "empty target", Error);
    CHECK_THROWS_AS(chamfer_objective(Image(32, 32), line, 0.0), ConfigError);
}

TEST_CASE("chamfer gradient matches finite differences") {
    std::mt19937_64 rng(4);
    const auto target = testkit::glyph_target('Z', 40, 3.0);
    const auto rendered = testkit::random_image(40, 40, rng);
    for (double cw : {0.0, 1.0, 500.0}) {
        const ChamferTarget ct(target, 3.0);
        const auto res = ct.evaluate(rendered, cw);
        auto loss = [&](const Image& x) { return ct.evaluate(x, cw).loss; };
        double worst = 0;
        for (std::size_t i = 0; i < rendered.size(); i += 7)
            worst = std::max(worst, std::abs(pixel_fd(loss, rendered, i, 1e-5) - res.grad.data[i]));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("gaussian blur is self-adjoint") {
    std::mt19937_64 rng(5);
    const auto a = testkit::random_image(33, 29, rng), b = testkit::random_image(33, 29, rng);
    CHECK(std::abs(inner(gaussian_blur(a, 2.5), b) - inner(a, gaussian_blur(b, 2.5))) < 1e-10);
}

TEST_CASE("identity augmentation is exact in both directions") {
    std::mt19937_64 rng(6);
    const auto img = testkit::random_image(48, 48, rng);
    const AugmentParams identity{0.0, {1.0, 1.0}, {0.75, 4.0 / 3.0}};
    const auto aug = augment(img, identity, rng);
    CHECK(aug.image.data == img.data);
    const auto up = testkit::random_image(48, 48, rng);
    CHECK(aug.backward(up).data == up.data);
}

TEST_CASE("warp backward is the exact adjoint") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto warp = Warp::sample(40, 36, AugmentParams{}, rng);
        const auto a = testkit::random_image(40, 36, rng), g = testkit::random_image(40, 36, rng);
        // The forward map is affine on pixels: W(a) = c + L a; the adjoint is L^T.
        const auto offset = warp.apply(Image(40, 36, 0.0));
        auto linear = warp.apply(a);
        for (std::size_t i = 0; i < linear.size(); ++i) linear.data[i] -= offset.data[i];
        CHECK(std::abs(inner(g, linear) - inner(warp.adjoint(g), a)) < 1e-10);
    }
}

TEST_CASE("warp backward matches finite differences of a probe") {
    std::mt19937_64 rng(8);
    const auto warp = Warp::sample(32, 32, AugmentParams{}, rng);
    const auto a = testkit::random_image(32, 32, rng), probe = testkit::random_image(32, 32, rng);
    const auto grad = warp.adjoint(probe);
    auto loss = [&](const Image& x) { return inner(probe, warp.apply(x)); };
    for (std::size_t i = 0; i < a.size(); i += 11) CHECK(std::abs(pixel_fd(loss, a, i, 1e-3) - grad.data[i]) < 1e-5);
}

TEST_CASE("augment parameters are validated") {
    CHECK_THROWS_AS((AugmentParams{0.5, {0.0, 1.0}, {1, 1}}.validate()), ConfigError);
    CHECK_THROWS_AS((AugmentParams{0.5, {0.8, 0.7}, {1, 1}}.validate()), ConfigError);
    CHECK_THROWS_AS((AugmentParams{1.5, {0.8, 1.0}, {1, 1}}.validate()), ConfigError);
}

TEST_CASE("warp keeps paper white outside the frame") {
    // Shrinking by 2 about the origin reads outside the input for most pixels.
    const auto warp = Warp::from_homography(20, 20, {2, 0, 0, 0, 2, 0, 0, 0, 1});
    const auto out = warp.apply(Image(20, 20, 0.0));
    CHECK(out.at(2, 2) == 0.0);
    CHECK(out.at(15, 15) == 1.0);
}

TEST_CASE("offline dispatch is transparent") {
    const auto target = testkit::glyph_target('Y', 48, 3.0);
    std::mt19937_64 rng(9);
    const auto rendered = testkit::random_image(48, 48, rng);
    OfflineObjectiveConfig cfg;
    cfg.kind = ObjectiveKind::Mse;
    auto provider = std::make_shared<OfflineProvider>(cfg);
    provider->set_target(ViewId::Y, target);
    const ProviderDispatch dispatch(provider, nullptr);
    GradientRequest req;
    req.view = ViewId::Y;
    req.rendered = rendered;
    const auto via = dispatch(req, ProviderMode::Offline);
    const auto direct = mse_objective(rendered, target);
    CHECK(via.loss == direct.loss);
    CHECK(via.grad.data == direct.grad.data);

    // Determinism.
    const auto again = dispatch(req, ProviderMode::Offline);
    CHECK(again.grad.data == via.grad.data);
}

TEST_CASE("scheduled objective switches from chamfer to the blend") {
    const auto target = testkit::glyph_target('X', 48, 3.0);
    std::mt19937_64 rng(10);
    OfflineObjectiveConfig cfg;
    auto provider = std::make_shared<OfflineProvider>(cfg);
    provider->set_target(ViewId::X, target);
    GradientRequest req;
    req.rendered = testkit::random_image(48, 48, rng);
    req.total_iterations = 100;
    req.iteration = 59;
    const ChamferTarget ct(target, cfg.blur_sigma);
    CHECK(provider->evaluate(req).loss == ct.evaluate(req.rendered, cfg.coverage_weight).loss);
    req.iteration = 60;
    const double blend = mse_objective(req.rendered, target).loss + ct.evaluate(req.rendered, cfg.coverage_weight).loss;
    CHECK(provider->evaluate(req).loss == doctest::Approx(blend).epsilon(1e-14));
}

TEST_CASE("dispatch errors") {
    auto provider = std::make_shared<OfflineProvider>();
    const ProviderDispatch dispatch(provider, nullptr);
    GradientRequest req;
    req.view = ViewId::Z;
    req.rendered = Image(32, 32, 1.0);
    CHECK_THROWS_AS(dispatch(req, ProviderMode::Offline), ContractError);
    CHECK_THROWS_AS(dispatch(req, ProviderMode::Bridge), ConfigError);

    struct WrongSize : GradientProvider {
        ObjectiveResult evaluate(const GradientRequest&) override { return {0.0, Image(8, 8)}; }
    };
    const ProviderDispatch bad(std::make_shared<WrongSize>(), nullptr);
    CHECK_THROWS_AS(bad(req, ProviderMode::Offline), ContractError);
}

TEST_CASE("mode and objective names round-trip") {
    for (auto k : {ObjectiveKind::Mse, ObjectiveKind::Chamfer, ObjectiveKind::Scheduled})
        CHECK(objective_kind_from_string(to_string(k)) == k);
    for (auto m : {ProviderMode::Offline, ProviderMode::Bridge}) CHECK(provider_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(objective_kind_from_string("l2"), ConfigError);
}
