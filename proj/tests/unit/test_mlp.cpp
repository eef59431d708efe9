#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "leo_madrl/mlp.hpp"
#include "oracles.hpp"

using namespace leo;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("zero network outputs the last bias") {
    MlpParams p = zero_mlp({3, 5, 4});
    p.biases.back() = {1.0, -2.0, 3.5, 0.25};
    const std::vector<double> x{0.3, -0.7, 9.0};
    const auto y = forward(p, x);
    CHECK(y == std::array<double, 4>{1.0, -2.0, 3.5, 0.25});
}

TEST_CASE("hand-evaluated 2-2-4 network") {
    MlpParams p = zero_mlp({2, 2, 4});
    p.weights[0] = {1.0, -1.0, 0.5, 2.0};  // h0 = relu(x0 - x1), h1 = relu(0.5 x0 + 2 x1)
    p.biases[0] = {0.0, -1.0};
    p.weights[1] = {1, 0, 0, 1, 1, 1, 2, -1};
    p.biases[1] = {0.0, 0.5, -0.5, 1.0};
    const std::vector<double> x{3.0, 1.0};
    // h0 = 2, h1 = relu(1.5 + 2 - 1) = 2.5
    const auto y = forward(p, x);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == 3.0);
    CHECK(y[2] == 4.0);
    CHECK(y[3] == 2.5);
    const std::vector<double> neg{-3.0, -1.0};
    // h0 = relu(-2) = 0, h1 = relu(-1.5 - 2 - 1) = 0
    CHECK(forward(p, neg) == std::array<double, 4>{0.0, 0.5, -0.5, 1.0});
}

TEST_CASE("last layer scales linearly") {
    std::mt19937_64 rng(4);
    MlpParams p = init_mlp({6, 8, 4}, rng);
    for (double& b : p.biases.back()) b = 0.1;
    const auto x = random_vector(rng, 6);
    const auto y = forward(p, x);
    MlpParams q = p;
    for (double& w : q.weights.back()) w *= 2.0;
    for (double& b : q.biases.back()) b *= 2.0;
    const auto y2 = forward(q, x);
    for (int a = 0; a < 4; ++a) CHECK(y2[a] == 2.0 * y[a]);
}

TEST_CASE("shape errors") {
    MlpParams p = zero_mlp({3, 4});
    const std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(forward(p, bad), ShapeError);
    CHECK_THROWS_AS(zero_mlp({3, 5}).validate(), ShapeError);
    MlpParams nan = zero_mlp({2, 4});
    nan.weights[0][1] = std::nan("");
    CHECK_THROWS_AS(nan.validate(), ShapeError);
}

TEST_CASE("glorot initialisation bounds") {
    std::mt19937_64 rng(1);
    const MlpParams p = init_mlp({22, 64, 64, 4}, rng);
    for (int l = 0; l < p.num_layers(); ++l) {
        const double bound = std::sqrt(6.0 / (p.layer_dims[l] + p.layer_dims[l + 1]));
        for (double w : p.weights[l]) CHECK(std::abs(w) <= bound);
        for (double b : p.biases[l]) CHECK(b == 0.0);
    }
}

TEST_CASE("td targets") {
    MlpParams target = zero_mlp({2, 4});
    target.biases[0] = {1.0, 3.0, 2.0, 5.0};
    const std::vector<double> s{0.0, 0.0};
    std::vector<Transition> batch(3);
    batch[0] = {s, 0, 0.3, s, {true, true, true, true}, true};
    batch[1] = {s, 1, 0.2, s, {true, true, true, false}, false};
    batch[2] = {s, 1, 0.2, s, {true, true, true, true}, false};
    const auto y = td_targets(batch, target, 0.9);
    CHECK(y[0] == 0.3);
    CHECK(y[1] == doctest::Approx(0.2 + 0.9 * 3.0));  // action 3 masked
    CHECK(y[2] == doctest::Approx(0.2 + 0.9 * 5.0));
    const auto myopic = td_targets(batch, target, 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(myopic[i] == batch[i].reward);
}

TEST_CASE("gradients agree with finite differences") {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const MlpParams p = init_mlp({6, 8, 4}, rng);
        std::vector<std::vector<double>> states;
        for (int i = 0; i < 5; ++i) states.push_back(random_vector(rng, 6));
        std::vector<Transition> batch;
        std::vector<double> targets;
        for (int i = 0; i < 5; ++i) {
            batch.push_back({states[i], i % 4, 0.0, states[i], {}, true});
            targets.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
        }
        worst = std::max(worst, oracle::max_gradient_error(p, batch, targets));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("only the taken action receives gradient") {
    std::mt19937_64 rng(12);
    const MlpParams p = init_mlp({6, 4}, rng);
    const auto s = random_vector(rng, 6);
    const std::vector<Transition> batch{{s, 2, 0.0, s, {}, true}};
    const std::vector<double> y{5.0};
    MlpGradients g;
    loss_and_gradients(p, batch, y, g);
    for (int out = 0; out < 4; ++out) {
        const bool taken = out == 2;
        CHECK((g.biases[0][out] != 0.0) == taken);
        for (int in = 0; in < 6; ++in) CHECK((g.weights[0][out * 6 + in] != 0.0) == taken);
    }
}

TEST_CASE("perfect predictions leave the weights unchanged") {
    std::mt19937_64 rng(6);
    MlpParams p = init_mlp({6, 8, 4}, rng);
    const auto s = random_vector(rng, 6);
    const double q = forward(p, s)[1];
    const std::vector<Transition> batch{{s, 1, q, s, {}, true}};
    AdamState opt = AdamState::for_params(p);
    const MlpParams before = p;
    TrainConfig cfg;
    CHECK(train_step(p, opt, p, batch, cfg) == 0.0);
    CHECK(p == before);
}

TEST_CASE("loss decreases on a single sample with a small step") {
    std::mt19937_64 rng(21);
    MlpParams p = init_mlp({6, 8, 4}, rng);
    const auto s = random_vector(rng, 6);
    const std::vector<Transition> batch{{s, 0, 1.5, s, {}, true}};
    AdamState opt = AdamState::for_params(p);
    TrainConfig cfg;
    cfg.learning_rate = 1e-4;
    double last = train_step(p, opt, p, batch, cfg);
    for (int i = 0; i < 100; ++i) {
        const double l = train_step(p, opt, p, batch, cfg);
        CHECK(l < last);
        last = l;
    }
}

TEST_CASE("diverged training is reported") {
    MlpParams p = zero_mlp({2, 4});
    const std::vector<double> s{1.0, 1.0};
    const std::vector<Transition> batch{{s, 0, std::numeric_limits<double>::infinity(), s, {}, true}};
    AdamState opt = AdamState::for_params(p);
    CHECK_THROWS_AS(train_step(p, opt, p, batch, TrainConfig{}), TrainingDivergedError);
}

TEST_CASE("target sync and weight copies are independent") {
    std::mt19937_64 rng(31);
    MlpParams p = init_mlp({6, 8, 4}, rng);
    MlpParams t = sync_target(p);
    CHECK(t == p);
    for (int i = 0; i < 10; ++i) {
        const auto x = random_vector(rng, 6);
        CHECK(forward(p, x) == forward(t, x));
    }
    p.weights[0][0] += 1.0;
    CHECK(t != p);
    CHECK(sync_target(sync_target(t)) == t);
    MlpParams local = copy_weights(t);
    local.biases[1][0] = 7.0;
    CHECK(t.biases[1][0] == 0.0);
}

TEST_CASE("weight serialization") {
    std::mt19937_64 rng(41);
    const MlpParams p = init_mlp({22, 16, 4}, rng);
    const auto bytes = serialize_weights(p);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "MADRLNET");
    CHECK(bytes.size() == 8 + 4 + 4 + 3 * 4 + 8 * p.parameter_count());
    CHECK(deserialize_weights(bytes) == p);
    CHECK(serialize_weights(deserialize_weights(bytes)) == bytes);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS(deserialize_weights(truncated));
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS(deserialize_weights(trailing));
    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS(deserialize_weights(magic));

    const auto path = std::filesystem::temp_directory_path() / "leo_madrl_unit_weights.bin";
    save_weights(p, path);
    CHECK(load_weights(path) == p);
    std::filesystem::remove(path);
}
