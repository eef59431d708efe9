#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leo {

inline constexpr int kNumActions = 4;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TrainingDivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Feedforward Q-network: rectifier hidden layers, identity output of width 4.
// Layer l maps dims[l] -> dims[l+1]; weights[l] is row-major (out x in).
struct MlpParams {
    std::vector<int> layer_dims;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_dim() const { return layer_dims.front(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    std::size_t parameter_count() const;
    // Throws ShapeError on inconsistent shapes or a non-finite entry.
    void validate() const;
    bool operator==(const MlpParams&) const = default;
};

MlpParams zero_mlp(std::vector<int> layer_dims);

// Uniform initialisation in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams init_mlp(std::vector<int> layer_dims, std::mt19937_64& rng);

std::array<double, kNumActions> forward(const MlpParams& params, std::span<const double> input);

// One replayed transition as seen by the learner. Spans view storage owned by
// the replay buffer.
struct Transition {
    std::span<const double> state;
    int action = 0;
    double reward = 0.0;
    std::span<const double> next_state;
    std::array<bool, kNumActions> next_mask{};
    bool terminal = false;
};

// y = r + gamma * max over feasible a' of Q_target(s', a'); y = r for terminal
// transitions or when s' has no feasible action.
std::vector<double> td_targets(std::span<const Transition> batch, const MlpParams& target, double gamma);

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    double discount = 0.9;
    int target_sync_every = 500;
    std::vector<int> hidden_layers{64, 64};
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

// Gradient container shaped like MlpParams.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Mean squared TD error on the taken actions and its gradient.
double loss_and_gradients(const MlpParams& params, std::span<const Transition> batch, std::span<const double> targets,
                          MlpGradients& grads);

// Moment estimates for the adaptive optimizer.
struct AdamState {
    MlpGradients m;
    MlpGradients v;
    std::int64_t step = 0;

    static AdamState for_params(const MlpParams& params);
};

// One optimizer step toward the TD targets computed from `target`. Returns the
// pre-update loss. Throws TrainingDivergedError on a non-finite loss.
double train_step(MlpParams& params, AdamState& opt, const MlpParams& target, std::span<const Transition> batch,
                  const TrainConfig& cfg);

inline MlpParams sync_target(const MlpParams& params) { return params; }
inline MlpParams copy_weights(const MlpParams& global) { return global; }

// Binary weight file: "MADRLNET", u32 version, u32 dim count, u32 dims, then
// per layer the row-major weights followed by the biases, all little-endian
// IEEE-754 doubles.
std::vector<std::uint8_t> serialize_weights(const MlpParams& params);
MlpParams deserialize_weights(std::span<const std::uint8_t> bytes);
void save_weights(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_weights(const std::filesystem::path& path);

}  // namespace leo
