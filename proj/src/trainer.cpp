#include "driftguard/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace driftguard {

void TrainConfig::validate() const {
    if (iterations < 1) throw UsageError(fmt::format("iterations must be >= 1 (got {})", iterations));
    if (!(initial_step > 0.0) || !std::isfinite(initial_step))
        throw UsageError(fmt::format("initial step must be a positive finite number (got {})", initial_step));
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda))
        throw UsageError(fmt::format("l2 lambda must be >= 0 (got {})", l2_lambda));
}

void CbConfig::validate(std::size_t d) const {
    base.validate();
    if (bounded_count > d)
        throw UsageError(fmt::format("cannot bound {} features in a {}-dimensional model", bounded_count, d));
    if (!(bound > 0.0) || !std::isfinite(bound))
        throw UsageError(fmt::format("bound r must be a positive finite number (got {})", bound));
}

double schedule_value(Schedule schedule, int t, int total) {
    if (total < 1 || t < 1 || t > total)
        throw UsageError(fmt::format("schedule iteration {} outside [1, {}]", t, total));
    switch (schedule) {
        case Schedule::constant:
            return 1.0;
        case Schedule::cosine_annealing:
            return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t - 1) / total));
    }
    return 1.0;
}

namespace {

struct Evaluation {
    double loss = 0.0;
    HingeGradient gradient;
};

// One pass computes loss and subgradient from the same margins.
Evaluation evaluate(const LinearModel& model, const Dataset& dataset, double l2_lambda, bool want_gradient) {
    require_compatible(model, dataset.dictionary());
    if (dataset.empty()) throw DataError("hinge loss of an empty dataset");

    Evaluation out;
    if (want_gradient) out.gradient.weights.assign(model.dimension(), 0.0);
    for (const auto& s : dataset.samples()) {
        const double y = signed_label(s.label);
        const double margin = y * score(model, s);
        if (margin < 1.0) {
            out.loss += 1.0 - margin;
            if (want_gradient) {
                for (FeatureIndex j : s.indices) out.gradient.weights[j] -= y;
                out.gradient.bias -= y;
            }
        }
    }
    if (l2_lambda > 0.0) {
        double sq = 0.0;
        for (double w : model.weights) sq += w * w;
        out.loss += 0.5 * l2_lambda * sq;
        if (want_gradient)
            for (std::size_t j = 0; j < model.dimension(); ++j) out.gradient.weights[j] += l2_lambda * model.weights[j];
    }
    return out;
}

// Shared by the baseline and the hardened trainer: w, b start at zero,
// eta_t = eta0 * s(t), full-batch step, then clip the bounded coordinates.
LinearModel descend(const Dataset& dataset, const TrainConfig& config, double l2_lambda,
                    std::span<const FeatureIndex> bounded, double bound, const TrainObserver& observer) {
    if (!dataset.has_both_classes()) throw DataError("degenerate training set: both classes are required");

    LinearModel model = LinearModel::zeros(dataset.dictionary());
    for (int t = 1; t <= config.iterations; ++t) {
        const double eta = config.initial_step * schedule_value(config.schedule, t, config.iterations);
        auto eval = evaluate(model, dataset, l2_lambda, true);
        if (!std::isfinite(eval.loss))
            throw NumericError(fmt::format("non-finite training loss at iteration {}", t));
        if (observer) observer(t, eval.loss);

        for (std::size_t j = 0; j < model.dimension(); ++j) model.weights[j] -= eta * eval.gradient.weights[j];
        model.bias -= eta * eval.gradient.bias;
        for (FeatureIndex j : bounded) model.weights[j] = std::clamp(model.weights[j], -bound, bound);
    }
    if (!model.all_finite()) throw NumericError("training produced non-finite parameters");
    return model;
}

}  // namespace

double hinge_loss(const LinearModel& model, const Dataset& dataset, double l2_lambda) {
    return evaluate(model, dataset, l2_lambda, false).loss;
}

HingeGradient hinge_gradient(const LinearModel& model, const Dataset& dataset, double l2_lambda) {
    return std::move(evaluate(model, dataset, l2_lambda, true).gradient);
}

LinearModel train_svm(const Dataset& dataset, const TrainConfig& config, const TrainObserver& observer) {
    config.validate();
    return descend(dataset, config, config.l2_lambda, {}, 0.0, observer);
}

std::vector<FeatureIndex> most_unstable(std::span<const double> delta, std::size_t count) {
    if (count > delta.size())
        throw UsageError(fmt::format("cannot select {} features out of {}", count, delta.size()));
    std::vector<FeatureIndex> order(delta.size());
    std::iota(order.begin(), order.end(), FeatureIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](FeatureIndex a, FeatureIndex b) { return delta[a] < delta[b]; });
    order.resize(count);
    return order;
}

CbResult train_svm_cb(const Dataset& dataset, std::span<const double> delta, const CbConfig& config,
                      const TrainObserver& observer) {
    const std::size_t d = dataset.dimension();
    config.validate(d);
    if (delta.size() != d)
        throw DataError(fmt::format("T-stability vector has length {} but d={}", delta.size(), d));

    CbResult result;
    result.bounded = most_unstable(delta, config.bounded_count);
    // The constrained objective carries no L2 term.
    result.model = descend(dataset, config.base, 0.0, result.bounded, config.bound, observer);
    return result;
}

}  // namespace driftguard
