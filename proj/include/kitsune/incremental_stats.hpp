#pragma once

#include <cstddef>

namespace kitsune {

// Exponential decay weight 2^(-lambda*dt). lambda must be positive; a
// negative dt (out-of-order timestamp) is clamped to 0, giving 1.
double decay_factor(double lambda, double dt);

struct Stats1D {
    double weight = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
};

struct Stats2D {
    double magnitude = 0.0;   // sqrt(mean_a^2 + mean_b^2)
    double radius = 0.0;      // sqrt(var_a^2 + var_b^2)
    double covariance = 0.0;  // sr / (w_a + w_b)
    double correlation = 0.0; // covariance / (std_a * std_b), 0 if either std is 0
};

// A damped incremental statistic over one unbounded value stream: the
// decayed weight, linear sum and squared sum, decayed by 2^(-lambda*dt)
// before each insert. Single writer; fields are plain data afterwards.
class DampedStat {
public:
    explicit DampedStat(double lambda);

    // Decays the tuple and adds (value, t). Returns the decay factor that
    // was applied; the first insert always uses factor 1. Out-of-order
    // timestamps are clamped (t_last never decreases). Throws
    // std::invalid_argument on a non-finite value.
    double insert(double value, double t);

    // Decay factor this stat would apply to an insert at time t.
    double pending_decay(double t) const;

    // Current weight discounted to time `now` (no state change).
    double decayed_weight(double now) const;

    double weight() const { return weight_; }
    double mean() const;
    double variance() const; // |ss/w - mean^2|
    double std_dev() const;

    // (weight, mean, std); all zero for an empty or evicted stream.
    Stats1D stats() const;

    // Residual value - mean recorded by the most recent insert, where the
    // mean is the post-insert running mean. 0 before the first insert.
    double last_residual() const { return last_residual_; }
    double last_time() const { return last_time_; }
    double lambda() const { return lambda_; }
    bool empty() const { return weight_ <= 0.0; }

    // Clears the tuple back to the empty state (eviction); lambda is kept.
    void reset();

    // Builds a stat with explicit tuple contents. Diagnostics and tests.
    static DampedStat from_raw(double lambda, double weight, double linear_sum,
                               double squared_sum, double t_last);

private:
    double lambda_;
    double weight_ = 0.0;
    double linear_sum_ = 0.0;
    double squared_sum_ = 0.0;
    double last_time_ = 0.0;
    double last_residual_ = 0.0;
    bool seen_ = false;
};

// The decayed sum of residual products shared by two streams. The link does
// not own the streams; callers pass the pair explicitly and must keep the
// orientation consistent.
class StatLink {
public:
    // Updates `inserted` with (value, t) and accumulates the product of its
    // fresh residual with `counterpart`'s stored residual. The sum decays by
    // the same factor the inserted stream applies. Returns that factor.
    double insert(DampedStat& inserted, const DampedStat& counterpart,
                  double value, double t);

    double residual_product_sum() const { return sr_; }
    void reset() { sr_ = 0.0; }

private:
    double sr_ = 0.0;
};

// Two-stream statistics per the damped-window summary table. Either stream
// may be empty (it contributes zero mean/std); if both are empty the result
// is all zeros.
Stats2D two_stream_stats(const DampedStat& a, const DampedStat& b,
                         const StatLink& link);

} // namespace kitsune
