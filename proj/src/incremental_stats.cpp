#include "kitsune/incremental_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace kitsune {

double decay_factor(double lambda, double dt) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("decay_factor: lambda must be positive");
    }
    if (dt < 0.0) {
        dt = 0.0; // out-of-order timestamp
    }
    return std::exp2(-lambda * dt);
}

DampedStat::DampedStat(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("DampedStat: lambda must be positive");
    }
}

double DampedStat::pending_decay(double t) const {
    if (!seen_) {
        return 1.0;
    }
    return decay_factor(lambda_, t - last_time_);
}

double DampedStat::insert(double value, double t) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("DampedStat::insert: non-finite value");
    }
    const double gamma = pending_decay(t);
    weight_ = gamma * weight_ + 1.0;
    linear_sum_ = gamma * linear_sum_ + value;
    squared_sum_ = gamma * squared_sum_ + value * value;
    if (!seen_ || t > last_time_) {
        last_time_ = t;
    }
    seen_ = true;
    last_residual_ = value - linear_sum_ / weight_;
    return gamma;
}

double DampedStat::decayed_weight(double now) const {
    return weight_ * pending_decay(now);
}

double DampedStat::mean() const {
    return weight_ > 0.0 ? linear_sum_ / weight_ : 0.0;
}

double DampedStat::variance() const {
    if (weight_ <= 0.0) {
        return 0.0;
    }
    const double mu = linear_sum_ / weight_;
    return std::fabs(squared_sum_ / weight_ - mu * mu);
}

double DampedStat::std_dev() const {
    return std::sqrt(variance());
}

Stats1D DampedStat::stats() const {
    if (weight_ <= 0.0) {
        return {};
    }
    return {weight_, mean(), std_dev()};
}

void DampedStat::reset() {
    weight_ = 0.0;
    linear_sum_ = 0.0;
    squared_sum_ = 0.0;
    last_time_ = 0.0;
    last_residual_ = 0.0;
    seen_ = false;
}

DampedStat DampedStat::from_raw(double lambda, double weight, double linear_sum,
                                double squared_sum, double t_last) {
    DampedStat s(lambda);
    s.weight_ = weight;
    s.linear_sum_ = linear_sum;
    s.squared_sum_ = squared_sum;
    s.last_time_ = t_last;
    s.seen_ = weight > 0.0;
    return s;
}

double StatLink::insert(DampedStat& inserted, const DampedStat& counterpart,
                        double value, double t) {
    const double gamma = inserted.pending_decay(t);
    sr_ *= gamma;
    inserted.insert(value, t);
    sr_ += inserted.last_residual() * counterpart.last_residual();
    return gamma;
}

Stats2D two_stream_stats(const DampedStat& a, const DampedStat& b,
                         const StatLink& link) {
    const double wa = a.weight();
    const double wb = b.weight();
    if (wa <= 0.0 && wb <= 0.0) {
        return {};
    }
    Stats2D out;
    const double mean_a = a.mean();
    const double mean_b = b.mean();
    const double var_a = a.variance();
    const double var_b = b.variance();
    out.magnitude = std::sqrt(mean_a * mean_a + mean_b * mean_b);
    out.radius = std::sqrt(var_a * var_a + var_b * var_b);
    out.covariance = link.residual_product_sum() / (wa + wb);
    const double std_product = std::sqrt(var_a) * std::sqrt(var_b);
    out.correlation = std_product > 0.0 ? out.covariance / std_product : 0.0;
    return out;
}

} // namespace kitsune
