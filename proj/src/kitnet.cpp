#include "kitsune/kitnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "kitsune/errors.hpp"

namespace kitsune {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::logic_error("rmse needs two equal-length vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

double uniform53(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

namespace {

std::size_t hidden_for(std::size_t visible, double rho) {
    const auto h = static_cast<std::size_t>(
        std::ceil(rho * static_cast<double>(visible)));
    return std::max<std::size_t>(1, h);
}

} // namespace

Autoencoder::Autoencoder(std::size_t visible, double rho, std::uint64_t seed)
    : visible_(visible), hidden_(hidden_for(visible, rho)) {
    std::mt19937_64 rng(seed);
    init_weights(rng);
}

Autoencoder::Autoencoder(std::size_t visible, double rho, std::mt19937_64& rng)
    : visible_(visible), hidden_(hidden_for(visible, rho)) {
    init_weights(rng);
}

void Autoencoder::init_weights(std::mt19937_64& rng) {
    if (visible_ == 0) throw std::logic_error("autoencoder needs inputs");
    const double bound = 1.0 / static_cast<double>(visible_);
    w_.resize(hidden_ * visible_);
    for (double& w : w_) w = (2.0 * uniform53(rng) - 1.0) * bound;
    b_enc_.assign(hidden_, 0.0);
    b_dec_.assign(visible_, 0.0);
    norm_min_.assign(visible_, std::numeric_limits<double>::max());
    norm_max_.assign(visible_, -std::numeric_limits<double>::max());
}

void Autoencoder::learn_extrema(const std::vector<double>& v) {
    if (v.size() != visible_) throw std::logic_error("input width mismatch");
    for (std::size_t j = 0; j < visible_; ++j) {
        norm_min_[j] = std::min(norm_min_[j], v[j]);
        norm_max_[j] = std::max(norm_max_[j], v[j]);
    }
}

std::vector<double> Autoencoder::normalize01(const std::vector<double>& v) const {
    if (v.size() != visible_) throw std::logic_error("input width mismatch");
    std::vector<double> out(visible_);
    for (std::size_t j = 0; j < visible_; ++j) {
        const double span = norm_max_[j] - norm_min_[j];
        out[j] = span > 0.0 ? (v[j] - norm_min_[j]) / span : 0.0;
    }
    return out;
}

void Autoencoder::reconstruct(const std::vector<double>& normed,
                              std::vector<double>& h, std::vector<double>& y,
                              std::uint64_t* macs) const {
    h.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        const double* row = w_.data() + i * visible_;
        double z = b_enc_[i];
        for (std::size_t j = 0; j < visible_; ++j) z += row[j] * normed[j];
        h[i] = sigmoid(z);
    }
    y.resize(visible_);
    for (std::size_t j = 0; j < visible_; ++j) {
        double z = b_dec_[j];
        for (std::size_t i = 0; i < hidden_; ++i) z += w_[i * visible_ + j] * h[i];
        y[j] = sigmoid(z);
    }
    if (macs) *macs += 2 * static_cast<std::uint64_t>(hidden_) * visible_;
}

std::vector<double> Autoencoder::forward(const std::vector<double>& normed,
                                         std::uint64_t* macs) const {
    if (normed.size() != visible_) throw std::logic_error("input width mismatch");
    std::vector<double> h, y;
    reconstruct(normed, h, y, macs);
    return y;
}

double Autoencoder::sgd_step(const std::vector<double>& v, double lr) {
    learn_extrema(v);
    const std::vector<double> normed = normalize01(v);
    std::vector<double> h, y;
    reconstruct(normed, h, y, nullptr);
    const double err = rmse(normed, y);

    const double scale = 2.0 / static_cast<double>(visible_);
    std::vector<double> delta_dec(visible_);
    for (std::size_t j = 0; j < visible_; ++j)
        delta_dec[j] = scale * (y[j] - normed[j]) * y[j] * (1.0 - y[j]);
    std::vector<double> delta_enc(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        const double* row = w_.data() + i * visible_;
        double back = 0.0;
        for (std::size_t j = 0; j < visible_; ++j) back += delta_dec[j] * row[j];
        delta_enc[i] = back * h[i] * (1.0 - h[i]);
    }
    // Tied weights take gradient from both layers at once.
    for (std::size_t i = 0; i < hidden_; ++i) {
        double* row = w_.data() + i * visible_;
        for (std::size_t j = 0; j < visible_; ++j)
            row[j] -= lr * (h[i] * delta_dec[j] + delta_enc[i] * normed[j]);
    }
    for (std::size_t i = 0; i < hidden_; ++i) b_enc_[i] -= lr * delta_enc[i];
    for (std::size_t j = 0; j < visible_; ++j) b_dec_[j] -= lr * delta_dec[j];
    return err;
}

double Autoencoder::execute(const std::vector<double>& v,
                            std::uint64_t* macs) const {
    const std::vector<double> normed = normalize01(v);
    std::vector<double> h, y;
    reconstruct(normed, h, y, macs);
    return rmse(normed, y);
}

double Autoencoder::loss(const std::vector<double>& normed) const {
    const std::vector<double> y = forward(normed);
    double acc = 0.0;
    for (std::size_t j = 0; j < visible_; ++j) {
        const double d = normed[j] - y[j];
        acc += d * d;
    }
    return acc / static_cast<double>(visible_);
}

Autoencoder::Gradients Autoencoder::loss_gradients(
    const std::vector<double>& normed) const {
    std::vector<double> h, y;
    reconstruct(normed, h, y, nullptr);
    const double scale = 2.0 / static_cast<double>(visible_);
    Gradients g;
    g.bias_dec.resize(visible_);
    for (std::size_t j = 0; j < visible_; ++j)
        g.bias_dec[j] = scale * (y[j] - normed[j]) * y[j] * (1.0 - y[j]);
    g.bias_enc.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
        const double* row = w_.data() + i * visible_;
        double back = 0.0;
        for (std::size_t j = 0; j < visible_; ++j) back += g.bias_dec[j] * row[j];
        g.bias_enc[i] = back * h[i] * (1.0 - h[i]);
    }
    g.weights.resize(hidden_ * visible_);
    for (std::size_t i = 0; i < hidden_; ++i)
        for (std::size_t j = 0; j < visible_; ++j)
            g.weights[i * visible_ + j] =
                h[i] * g.bias_dec[j] + g.bias_enc[i] * normed[j];
    return g;
}

AeParameters Autoencoder::parameters() const {
    return {visible_, hidden_, w_, b_enc_, b_dec_, norm_min_, norm_max_};
}

void Autoencoder::set_parameters(AeParameters p) {
    if (p.visible == 0 || p.hidden == 0 ||
        p.weights.size() != p.hidden * p.visible ||
        p.bias_enc.size() != p.hidden || p.bias_dec.size() != p.visible ||
        p.norm_min.size() != p.visible || p.norm_max.size() != p.visible)
        throw FormatError("inconsistent autoencoder parameters");
    visible_ = p.visible;
    hidden_ = p.hidden;
    w_ = std::move(p.weights);
    b_enc_ = std::move(p.bias_enc);
    b_dec_ = std::move(p.bias_dec);
    norm_min_ = std::move(p.norm_min);
    norm_max_ = std::move(p.norm_max);
}

Autoencoder Autoencoder::from_parameters(AeParameters params) {
    Autoencoder ae;
    ae.set_parameters(std::move(params));
    return ae;
}

nlohmann::json Autoencoder::to_json() const {
    return nlohmann::json{{"visible", visible_},   {"hidden", hidden_},
                          {"weights", w_},         {"bias_enc", b_enc_},
                          {"bias_dec", b_dec_},    {"norm_min", norm_min_},
                          {"norm_max", norm_max_}};
}

Autoencoder Autoencoder::from_json(const nlohmann::json& j) {
    AeParameters p;
    try {
        p.visible = j.at("visible").get<std::size_t>();
        p.hidden = j.at("hidden").get<std::size_t>();
        p.weights = j.at("weights").get<std::vector<double>>();
        p.bias_enc = j.at("bias_enc").get<std::vector<double>>();
        p.bias_dec = j.at("bias_dec").get<std::vector<double>>();
        p.norm_min = j.at("norm_min").get<std::vector<double>>();
        p.norm_max = j.at("norm_max").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad autoencoder: ") + e.what());
    }
    return from_parameters(std::move(p));
}

KitNetModel::KitNetModel(FeatureMap map, KitNetConfig config)
    : map_(std::move(map)), config_(config) {
    map_.validate();
    std::mt19937_64 rng(config_.seed);
    ensemble_.reserve(map_.groups.size());
    for (const auto& group : map_.groups)
        ensemble_.emplace_back(group.size(), config_.rho, rng);
    output_ = Autoencoder(ensemble_.size(), config_.rho, rng);
}

double KitNetModel::train_step(const FeatureVector& x) {
    if (execute_mode_)
        throw std::logic_error("train_step on a model in execute mode");
    map_.apply_into(x, scratch_);
    std::vector<double> tails(ensemble_.size());
    for (std::size_t g = 0; g < ensemble_.size(); ++g)
        tails[g] = ensemble_[g].sgd_step(scratch_[g], config_.learning_rate);
    const double score = output_.sgd_step(tails, config_.learning_rate);
    phi_ = std::max(phi_, score);
    ++train_count_;
    return score;
}

double KitNetModel::execute_step(const FeatureVector& x, ExecuteDetail* detail,
                                 std::uint64_t* macs) const {
    if (train_count_ == 0)
        throw std::logic_error("execute_step on an untrained model");
    std::vector<std::vector<double>> parts;
    map_.apply_into(x, parts);
    std::vector<double> tails(ensemble_.size());
    for (std::size_t g = 0; g < ensemble_.size(); ++g)
        tails[g] = ensemble_[g].execute(parts[g], macs);
    const double score = output_.execute(tails, macs);
    if (detail) {
        detail->output_input = output_.normalize01(tails);
        detail->ensemble_rmse = std::move(tails);
        detail->score = score;
    }
    return score;
}

bool KitNetModel::alert(double score) const {
    if (phi_ < 0.0)
        throw std::logic_error("alert threshold unset: model never trained");
    return score >= phi_ * config_.beta_s;
}

std::uint64_t KitNetModel::macs_per_execute() const {
    std::uint64_t total = 0;
    for (const Autoencoder& ae : ensemble_)
        total += 2 * static_cast<std::uint64_t>(ae.hidden()) * ae.visible();
    total += 2 * static_cast<std::uint64_t>(output_.hidden()) * output_.visible();
    return total;
}

nlohmann::json KitNetModel::to_json() const {
    nlohmann::json ensemble = nlohmann::json::array();
    for (const Autoencoder& ae : ensemble_) ensemble.push_back(ae.to_json());
    return nlohmann::json{
        {"map", map_.to_json()},
        {"config",
         {{"rho", config_.rho},
          {"learning_rate", config_.learning_rate},
          {"beta_s", config_.beta_s},
          {"seed", config_.seed}}},
        {"ensemble", std::move(ensemble)},
        {"output", output_.to_json()},
        {"phi", phi_},
        {"train_count", train_count_},
        {"execute_mode", execute_mode_}};
}

KitNetModel KitNetModel::from_json(const nlohmann::json& j) {
    KitNetModel model;
    try {
        model.map_ = FeatureMap::from_json(j.at("map"));
        const auto& c = j.at("config");
        model.config_.rho = c.at("rho").get<double>();
        model.config_.learning_rate = c.at("learning_rate").get<double>();
        model.config_.beta_s = c.at("beta_s").get<double>();
        model.config_.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& ae : j.at("ensemble"))
            model.ensemble_.push_back(Autoencoder::from_json(ae));
        model.output_ = Autoencoder::from_json(j.at("output"));
        model.phi_ = j.at("phi").get<double>();
        model.train_count_ = j.at("train_count").get<std::size_t>();
        model.execute_mode_ = j.at("execute_mode").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model: ") + e.what());
    }
    if (model.ensemble_.size() != model.map_.groups.size())
        throw FormatError("bad model: ensemble does not match feature map");
    for (std::size_t g = 0; g < model.ensemble_.size(); ++g)
        if (model.ensemble_[g].visible() != model.map_.groups[g].size())
            throw FormatError("bad model: layer width does not match group");
    if (model.output_.visible() != model.ensemble_.size())
        throw FormatError("bad model: output width does not match ensemble");
    return model;
}

} // namespace kitsune
