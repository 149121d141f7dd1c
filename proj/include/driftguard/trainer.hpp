#pragma once

#include <functional>
#include <span>
#include <vector>

#include "driftguard/core.hpp"

namespace driftguard {

enum class Schedule { constant, cosine_annealing };

struct TrainConfig {
    int iterations = 2000;
    double initial_step = 7e-5;
    Schedule schedule = Schedule::cosine_annealing;
    double l2_lambda = 1.0;
    std::uint64_t seed = 0;  // full-batch descent never draws from it; echoed into model files

    /// Throws UsageError when N < 1, eta0 <= 0 or lambda < 0.
    void validate() const;
};

/// Hardened SVM settings. CB-H and CB-L are the two reference presets.
struct CbConfig {
    TrainConfig base{};
    std::size_t bounded_count = 100;
    double bound = 0.8;

    static CbConfig high() { return CbConfig{TrainConfig{}, 100, 0.8}; }
    static CbConfig low() { return CbConfig{TrainConfig{}, 100, 0.2}; }

    void validate(std::size_t d) const;
};

struct HingeGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Learning-rate multiplier s(t) for 1 <= t <= N.
/// Cosine annealing: 0.5 * (1 + cos(pi * (t - 1) / N)).
double schedule_value(Schedule schedule, int t, int total);

/// Sum of hinge losses over the dataset plus lambda * |w|^2 / 2.
double hinge_loss(const LinearModel& model, const Dataset& dataset, double l2_lambda);

/// Subgradient of hinge_loss. Samples sitting exactly on margin 1 contribute nothing.
HingeGradient hinge_gradient(const LinearModel& model, const Dataset& dataset, double l2_lambda);

/// Called once per iteration with the loss evaluated before that iteration's update.
using TrainObserver = std::function<void(int iteration, double loss_before_step)>;

/// Baseline linear SVM: full-batch gradient descent on hinge + L2 from (0, 0).
/// Throws DataError on a single-class dataset, NumericError on a non-finite loss.
LinearModel train_svm(const Dataset& dataset, const TrainConfig& config, const TrainObserver& observer = {});

struct CbResult {
    LinearModel model;
    std::vector<FeatureIndex> bounded;  // the n_f most negative T-stability indices
};

/// Indices of the `count` smallest deltas, ties broken by ascending index.
std::vector<FeatureIndex> most_unstable(std::span<const double> delta, std::size_t count);

/// SVM with custom bounds: gradient descent on the unregularized hinge loss
/// with every bounded weight clipped into [-r, r] after each step.
CbResult train_svm_cb(const Dataset& dataset, std::span<const double> delta, const CbConfig& config,
                      const TrainObserver& observer = {});

}  // namespace driftguard
