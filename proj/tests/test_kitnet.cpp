#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "kitsune/errors.hpp"
#include "kitsune/feature_mapper.hpp"
#include "kitsune/kitnet.hpp"
#include "support/synth.hpp"

using kitsune::AeParameters;
using kitsune::Autoencoder;
using kitsune::FeatureMap;
using kitsune::FeatureVector;
using kitsune::KitNetConfig;
using kitsune::KitNetModel;

namespace {

FeatureMap interleaved_map(std::size_t n, std::size_t n_groups) {
    FeatureMap map;
    map.n = n;
    map.groups.assign(n_groups, {});
    for (std::size_t i = 0; i < n; ++i) map.groups[i % n_groups].push_back(i);
    map.m = 0;
    for (const auto& g : map.groups) map.m = std::max(map.m, g.size());
    return map;
}

FeatureMap contiguous_map(const std::vector<std::size_t>& sizes) {
    FeatureMap map;
    map.n = 0;
    for (std::size_t s : sizes) {
        std::vector<std::size_t> g(s);
        std::iota(g.begin(), g.end(), map.n);
        map.n += s;
        map.groups.push_back(std::move(g));
        map.m = std::max(map.m, s);
    }
    return map;
}

FeatureVector random_unit_vector(std::size_t n, std::mt19937_64& rng) {
    FeatureVector v(n);
    for (auto& x : v) x = kitsune::uniform53(rng);
    return v;
}

} // namespace

TEST_CASE("activation and error primitives") {
    CHECK(kitsune::sigmoid(0.0) == 0.5);
    CHECK(kitsune::sigmoid(3.0) + kitsune::sigmoid(-3.0) == doctest::Approx(1.0));
    CHECK(kitsune::sigmoid(2.0) > kitsune::sigmoid(1.0));
    CHECK(kitsune::rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
    CHECK(kitsune::rmse({3.0, 4.0}, {0.0, 0.0}) ==
          kitsune::rmse({0.0, 0.0}, {3.0, 4.0}));
    CHECK(kitsune::rmse({1.0}, {1.0}) == 0.0);
    CHECK_THROWS_AS(kitsune::rmse({1.0}, {1.0, 2.0}), std::logic_error);
    CHECK_THROWS_AS(kitsune::rmse({}, {}), std::logic_error);
}

TEST_CASE("layer shapes follow the compression ratio") {
    const FeatureMap map = contiguous_map({3, 7, 5});
    KitNetConfig cfg;
    cfg.rho = 0.75;
    const KitNetModel model(map, cfg);
    REQUIRE(model.ensemble_size() == 3);
    CHECK(model.ensemble_member(0).visible() == 3);
    CHECK(model.ensemble_member(0).hidden() == 3);
    CHECK(model.ensemble_member(1).visible() == 7);
    CHECK(model.ensemble_member(1).hidden() == 6);
    CHECK(model.ensemble_member(2).visible() == 5);
    CHECK(model.ensemble_member(2).hidden() == 4);
    CHECK(model.output_layer().visible() == 3);
    CHECK(model.output_layer().hidden() == 3);

    const Autoencoder tiny(1, 0.75, std::uint64_t{1});
    CHECK(tiny.hidden() == 1); // never collapses below one unit
}

TEST_CASE("initial weights stay inside the fan-in bound") {
    for (std::uint64_t seed : {1u, 7u, 42u}) {
        const Autoencoder ae(9, 0.75, seed);
        const AeParameters p = ae.parameters();
        REQUIRE(p.weights.size() == p.hidden * p.visible);
        const double bound = 1.0 / static_cast<double>(p.visible);
        for (double w : p.weights) {
            CHECK(std::abs(w) <= bound);
        }
        for (double b : p.bias_enc) CHECK(b == 0.0);
        for (double b : p.bias_dec) CHECK(b == 0.0);
    }
}

TEST_CASE("same seed builds the same model") {
    const FeatureMap map = interleaved_map(10, 3);
    KitNetConfig cfg;
    cfg.seed = 99;
    const KitNetModel a(map, cfg);
    const KitNetModel b(map, cfg);
    CHECK(a.to_json().dump() == b.to_json().dump());
    KitNetConfig other = cfg;
    other.seed = 100;
    const KitNetModel c(map, other);
    CHECK(a.to_json().dump() != c.to_json().dump());
}

TEST_CASE("all-zero parameters push every output to one half") {
    AeParameters p;
    p.visible = 4;
    p.hidden = 2;
    p.weights.assign(8, 0.0);
    p.bias_enc.assign(2, 0.0);
    p.bias_dec.assign(4, 0.0);
    p.norm_min.assign(4, 0.0);
    p.norm_max.assign(4, 1.0);
    const Autoencoder ae = Autoencoder::from_parameters(p);
    const FeatureVector y = ae.forward({0.1, 0.9, 0.3, 0.7});
    REQUIRE(y.size() == 4);
    for (double v : y) CHECK(v == 0.5);
}

TEST_CASE("forward pass matches a pencil-and-paper network") {
    AeParameters p;
    p.visible = 2;
    p.hidden = 1;
    p.weights = {0.5, -0.25};
    p.bias_enc = {0.1};
    p.bias_dec = {0.2, -0.1};
    p.norm_min = {0.0, 0.0};
    p.norm_max = {1.0, 1.0};
    const Autoencoder ae = Autoencoder::from_parameters(p);

    const double h = 1.0 / (1.0 + std::exp(-(0.5 * 0.8 - 0.25 * 0.4 + 0.1)));
    const double y0 = 1.0 / (1.0 + std::exp(-(0.5 * h + 0.2)));
    const double y1 = 1.0 / (1.0 + std::exp(-(-0.25 * h - 0.1)));
    const FeatureVector y = ae.forward({0.8, 0.4});
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(y0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(y1).epsilon(1e-15));

    const double expect =
        std::sqrt(((y0 - 0.8) * (y0 - 0.8) + (y1 - 0.4) * (y1 - 0.4)) / 2.0);
    CHECK(ae.execute({0.8, 0.4}) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("analytic gradients agree with central differences") {
    struct Shape {
        std::size_t visible;
        double rho;
    };
    const std::vector<Shape> shapes = {{2, 0.5}, {7, 0.85}, {10, 0.8}};
    std::mt19937_64 rng(5);
    const double delta = 1e-4;
    for (const Shape& s : shapes) {
        Autoencoder ae(s.visible, s.rho, rng);
        const FeatureVector v = random_unit_vector(s.visible, rng);
        const auto grads = ae.loss_gradients(v);
        AeParameters p = ae.parameters();

        auto check_one = [&](std::vector<double> AeParameters::*field,
                             const std::vector<double>& analytic) {
            const std::vector<double> saved = p.*field;
            REQUIRE(analytic.size() == saved.size());
            for (std::size_t i = 0; i < saved.size(); ++i) {
                AeParameters plus = p;
                (plus.*field)[i] += delta;
                AeParameters minus = p;
                (minus.*field)[i] -= delta;
                const double lp = Autoencoder::from_parameters(plus).loss(v);
                const double lm = Autoencoder::from_parameters(minus).loss(v);
                const double numeric = (lp - lm) / (2.0 * delta);
                const double scale =
                    std::max(1e-8, std::abs(numeric) + std::abs(analytic[i]));
                CHECK(std::abs(numeric - analytic[i]) / scale < 1e-4);
            }
        };
        check_one(&AeParameters::weights, grads.weights);
        check_one(&AeParameters::bias_enc, grads.bias_enc);
        check_one(&AeParameters::bias_dec, grads.bias_dec);
    }
}

TEST_CASE("zero learning rate reports error without touching weights") {
    std::mt19937_64 rng(13);
    Autoencoder ae(6, 0.75, rng);
    const FeatureVector v = random_unit_vector(6, rng);
    ae.learn_extrema(v);
    const std::string before = ae.to_json().dump();
    const double reported = ae.sgd_step(v, 0.0);
    CHECK(ae.to_json().dump() == before);
    CHECK(reported == ae.execute(v));
}

TEST_CASE("a single repeated input is memorized") {
    std::mt19937_64 rng(17);
    Autoencoder ae(8, 0.75, rng);
    FeatureVector v = random_unit_vector(8, rng);
    for (auto& x : v) x = 0.2 + 0.6 * x;
    ae.learn_extrema(FeatureVector(8, 0.0));
    ae.learn_extrema(FeatureVector(8, 1.0));

    std::vector<double> curve;
    for (int i = 0; i < 1000; ++i) curve.push_back(ae.sgd_step(v, 0.1));
    CHECK(ae.execute(v) < 0.05);
    for (std::size_t i = 51; i < curve.size(); ++i)
        CHECK(curve[i] <= curve[i - 1] + 1e-12);
}

TEST_CASE("training score drops on stationary traffic") {
    synth::MixtureGen gen(8, 2, 3, 21);
    const FeatureMap map = interleaved_map(8, 2);
    KitNetConfig cfg;
    cfg.seed = 4;
    KitNetModel model(map, cfg);
    std::vector<double> scores;
    for (int i = 0; i < 5000; ++i) scores.push_back(model.train_step(gen.row()));
    const double head =
        std::accumulate(scores.begin(), scores.begin() + 1000, 0.0) / 1000.0;
    const double tail =
        std::accumulate(scores.end() - 1000, scores.end(), 0.0) / 1000.0;
    CHECK(tail < head);
    CHECK(model.train_count() == 5000);
}

TEST_CASE("threshold base tracks the worst training score") {
    synth::MixtureGen gen(6, 2, 2, 33);
    KitNetModel model(interleaved_map(6, 2), KitNetConfig{});
    double worst = -1.0;
    for (int i = 0; i < 500; ++i) {
        worst = std::max(worst, model.train_step(gen.row()));
        CHECK(model.phi() == worst);
    }
}

TEST_CASE("execution is pure and alerts compare inclusively") {
    synth::MixtureGen gen(8, 2, 3, 8);
    KitNetConfig cfg;
    cfg.beta_s = 2.0;
    KitNetModel model(interleaved_map(8, 2), cfg);
    for (int i = 0; i < 4000; ++i) model.train_step(gen.row());
    model.set_execute_mode(true);
    CHECK(model.execute_mode());
    CHECK_THROWS_AS(model.train_step(gen.row()), std::logic_error);

    const FeatureVector probe = gen.row();
    const std::string before = model.to_json().dump();
    const double s1 = model.execute_step(probe);
    const double s2 = model.execute_step(probe);
    CHECK(s1 == s2);
    CHECK(model.to_json().dump() == before);

    CHECK(model.alert(model.phi() * cfg.beta_s));
    CHECK_FALSE(model.alert(model.phi() * 0.5));

    // held-out benign traffic stays almost entirely under the bar
    int alerts = 0;
    std::vector<double> normal_scores;
    for (int i = 0; i < 1000; ++i) {
        const double s = model.execute_step(gen.row());
        normal_scores.push_back(s);
        if (model.alert(s)) ++alerts;
    }
    CHECK(alerts <= 10);

    // a strong shift on one latent group stands out
    std::sort(normal_scores.begin(), normal_scores.end());
    const double median = normal_scores[normal_scores.size() / 2];
    kitsune::ExecuteDetail detail;
    const double hot = model.execute_step(gen.anomalous_row(0, 6.0), &detail);
    CHECK(hot > median);
    REQUIRE(detail.ensemble_rmse.size() == 2);
    CHECK(detail.score == hot);
}

TEST_CASE("guards fire before any training has happened") {
    KitNetModel model(interleaved_map(4, 2), KitNetConfig{});
    CHECK(model.train_count() == 0);
    CHECK(model.phi() == -1.0);
    CHECK_THROWS_AS(model.execute_step({0.1, 0.2, 0.3, 0.4}), std::logic_error);
    CHECK_THROWS_AS(model.alert(1.0), std::logic_error);
}

TEST_CASE("a saved model scores exactly like the original") {
    synth::MixtureGen gen(10, 3, 2, 55);
    KitNetConfig cfg;
    cfg.seed = 12;
    KitNetModel model(interleaved_map(10, 3), cfg);
    for (int i = 0; i < 2000; ++i) model.train_step(gen.row());
    model.set_execute_mode(true);

    const nlohmann::json saved = model.to_json();
    const KitNetModel restored = KitNetModel::from_json(saved);
    CHECK(restored.phi() == model.phi());
    CHECK(restored.train_count() == model.train_count());
    CHECK(restored.execute_mode());
    for (int i = 0; i < 100; ++i) {
        const FeatureVector x = gen.row();
        CHECK(restored.execute_step(x) == model.execute_step(x));
    }
    CHECK(restored.to_json().dump() == saved.dump());

    nlohmann::json broken = saved;
    broken["ensemble"] = nlohmann::json::array();
    CHECK_THROWS_AS(KitNetModel::from_json(broken), kitsune::FormatError);
}

TEST_CASE("multiply-accumulate count matches the closed form") {
    const FeatureMap map = contiguous_map({3, 7, 5});
    KitNetConfig cfg;
    cfg.rho = 0.75;
    KitNetModel model(map, cfg);
    synth::MixtureGen gen(15, 3, 2, 2);
    for (int i = 0; i < 10; ++i) model.train_step(gen.row());

    // 2*h*d per tied-weight pass: 2*(3*3 + 6*7 + 4*5) + 2*3*3
    CHECK(model.macs_per_execute() == 160);
    std::uint64_t counted = 0;
    model.execute_step(gen.row(), nullptr, &counted);
    CHECK(counted == model.macs_per_execute());
}

TEST_CASE("normalization learns extrema only when asked") {
    std::mt19937_64 rng(3);
    Autoencoder ae(3, 0.75, rng);
    // a single observation spans nothing: everything maps to zero
    ae.learn_extrema({2.0, 4.0, 6.0});
    CHECK(ae.normalize01({2.0, 4.0, 6.0}) == FeatureVector{0.0, 0.0, 0.0});

    ae.learn_extrema({4.0, 8.0, 10.0});
    const FeatureVector mid = ae.normalize01({3.0, 6.0, 8.0});
    CHECK(mid[0] == doctest::Approx(0.5));
    CHECK(mid[1] == doctest::Approx(0.5));
    CHECK(mid[2] == doctest::Approx(0.5));

    // values beyond the seen range keep going; no clamping
    const FeatureVector far = ae.normalize01({6.0, 0.0, 14.0});
    CHECK(far[0] == doctest::Approx(2.0));
    CHECK(far[1] == doctest::Approx(-1.0));
    CHECK(far[2] == doctest::Approx(2.0));
}
