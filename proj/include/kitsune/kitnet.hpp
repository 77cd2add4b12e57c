#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "json.hpp"
#include "kitsune/feature_mapper.hpp"

namespace kitsune {

double sigmoid(double x);
double rmse(const std::vector<double>& a, const std::vector<double>& b);
// Uniform draw in [0, 1) using the top 53 bits of the generator output, so
// results are identical across platforms for a given seed.
double uniform53(std::mt19937_64& g);

struct AeParameters {
    std::size_t visible = 0;
    std::size_t hidden = 0;
    std::vector<double> weights; // hidden x visible, row-major, shared by both layers
    std::vector<double> bias_enc;
    std::vector<double> bias_dec;
    std::vector<double> norm_min; // per visible column
    std::vector<double> norm_max;
};

// Three-layer autoencoder with tied weights: encode through W, decode
// through its transpose, sigmoid on both layers. Inputs are rescaled to
// [0,1] against per-column extrema learned during training; at execute time
// the same affine map is applied without refitting, so unseen magnitudes
// land outside the unit box and reconstruct poorly on purpose.
class Autoencoder {
public:
    Autoencoder() = default; // empty shell; fill via set_parameters
    Autoencoder(std::size_t visible, double rho, std::uint64_t seed);
    Autoencoder(std::size_t visible, double rho, std::mt19937_64& rng);
    static Autoencoder from_parameters(AeParameters params);

    std::size_t visible() const { return visible_; }
    std::size_t hidden() const { return hidden_; }

    void learn_extrema(const std::vector<double>& v);
    std::vector<double> normalize01(const std::vector<double>& v) const;
    std::vector<double> forward(const std::vector<double>& normed,
                                std::uint64_t* macs = nullptr) const;

    // One stochastic gradient step on this instance; returns the
    // reconstruction error measured before the weights moved. Also refits
    // the normalization extrema to the instance.
    double sgd_step(const std::vector<double>& v, double lr);

    // Reconstruction error only; never mutates.
    double execute(const std::vector<double>& v,
                   std::uint64_t* macs = nullptr) const;

    double loss(const std::vector<double>& normed) const; // mean squared error
    struct Gradients {
        std::vector<double> weights;
        std::vector<double> bias_enc;
        std::vector<double> bias_dec;
    };
    Gradients loss_gradients(const std::vector<double>& normed) const;

    AeParameters parameters() const;
    void set_parameters(AeParameters params);

    nlohmann::json to_json() const;
    static Autoencoder from_json(const nlohmann::json& j);

private:
    void init_weights(std::mt19937_64& rng);
    void reconstruct(const std::vector<double>& normed, std::vector<double>& h,
                     std::vector<double>& y, std::uint64_t* macs) const;

    std::size_t visible_ = 0;
    std::size_t hidden_ = 0;
    std::vector<double> w_; // hidden x visible
    std::vector<double> b_enc_;
    std::vector<double> b_dec_;
    std::vector<double> norm_min_;
    std::vector<double> norm_max_;
};

struct KitNetConfig {
    double rho = 0.75; // hidden size as a fraction of input size
    double learning_rate = 0.1;
    double beta_s = 1.0; // alert threshold as a multiple of the worst train score
    std::uint64_t seed = 1;
};

struct ExecuteDetail {
    std::vector<double> ensemble_rmse; // raw per-group reconstruction errors
    std::vector<double> output_input;  // those errors as the output layer saw them
    double score = 0.0;
};

// Ensemble of small autoencoders, one per correlated feature group, whose
// per-group reconstruction errors feed one output autoencoder. The output
// reconstruction error is the anomaly score. Training is single-pass: each
// instance is scored, then learned from, and never shown again.
class KitNetModel {
public:
    KitNetModel(FeatureMap map, KitNetConfig config);

    // Scores the instance, then updates every layer on it. The running
    // score maximum becomes the alert threshold base phi.
    double train_step(const FeatureVector& x);

    double execute_step(const FeatureVector& x, ExecuteDetail* detail = nullptr,
                        std::uint64_t* macs = nullptr) const;

    // Inclusive comparison against phi * beta_s. The threshold only exists
    // once training has set phi; asking earlier is a caller bug.
    bool alert(double score) const;

    double phi() const { return phi_; } // -1 until the first training score
    std::size_t train_count() const { return train_count_; }
    bool execute_mode() const { return execute_mode_; }
    void set_execute_mode(bool on) { execute_mode_ = on; }

    const FeatureMap& map() const { return map_; }
    const KitNetConfig& config() const { return config_; }
    std::size_t ensemble_size() const { return ensemble_.size(); }
    const Autoencoder& ensemble_member(std::size_t i) const { return ensemble_[i]; }
    const Autoencoder& output_layer() const { return output_; }

    // Multiply-accumulate count of one execute pass, from the layer shapes.
    std::uint64_t macs_per_execute() const;

    nlohmann::json to_json() const;
    static KitNetModel from_json(const nlohmann::json& j);

private:
    KitNetModel() = default;

    FeatureMap map_;
    KitNetConfig config_;
    std::vector<Autoencoder> ensemble_;
    Autoencoder output_;
    double phi_ = -1.0;
    std::size_t train_count_ = 0;
    bool execute_mode_ = false;
    std::vector<std::vector<double>> scratch_;
};

} // namespace kitsune
