#include "driftguard/eval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace driftguard {

TemporalSplit temporal_split(const Dataset& dataset, const SplitSpec& spec) {
    TemporalSplit out{dataset.filter([&](const SparseSample& s) { return s.timestamp < spec.boundary; }),
                      dataset.filter([&](const SparseSample& s) { return s.timestamp >= spec.boundary; })};
    if (out.train.empty())
        throw DataError(fmt::format("temporal split at {} leaves the training side empty", spec.boundary));
    if (out.test.empty())
        throw DataError(fmt::format("temporal split at {} leaves the test side empty", spec.boundary));
    return out;
}

double partial_auc(std::span<const double> positive_scores, std::span<const double> negative_scores,
                   double fpr_cap) {
    if (!(fpr_cap > 0.0 && fpr_cap <= 1.0))
        throw UsageError(fmt::format("FPR cap must lie in (0, 1] (got {})", fpr_cap));
    if (positive_scores.empty() || negative_scores.empty())
        throw DataError("partial AUC needs samples from both classes");

    struct Scored {
        double score;
        bool positive;
    };
    std::vector<Scored> all;
    all.reserve(positive_scores.size() + negative_scores.size());
    for (double s : positive_scores) all.push_back({s, true});
    for (double s : negative_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

    const double n_pos = static_cast<double>(positive_scores.size());
    const double n_neg = static_cast<double>(negative_scores.size());
    double area = 0.0;
    double fpr = 0.0, tpr = 0.0;
    std::size_t i = 0;
    while (i < all.size() && fpr < fpr_cap) {
        std::size_t tp = 0, fp = 0;
        const double threshold = all[i].score;
        for (; i < all.size() && all[i].score == threshold; ++i) (all[i].positive ? tp : fp)++;
        const double next_fpr = fpr + static_cast<double>(fp) / n_neg;
        const double next_tpr = tpr + static_cast<double>(tp) / n_pos;
        if (next_fpr > fpr_cap) {
            // Interpolate the segment at the cap.
            const double cut_tpr = tpr + (next_tpr - tpr) * (fpr_cap - fpr) / (next_fpr - fpr);
            area += (fpr_cap - fpr) * (tpr + cut_tpr) / 2.0;
            fpr = fpr_cap;
            break;
        }
        area += (next_fpr - fpr) * (tpr + next_tpr) / 2.0;
        fpr = next_fpr;
        tpr = next_tpr;
    }
    // Rounding can leave the final FPR a hair under 1; the curve then sits at TPR 1.
    if (fpr < fpr_cap) area += (fpr_cap - fpr) * tpr;
    return std::clamp(area / fpr_cap, 0.0, 1.0);
}

double partial_auc(const LinearModel& model, const Dataset& samples, double fpr_cap) {
    require_compatible(model, samples.dictionary());
    std::vector<double> pos, neg;
    for (const auto& s : samples.samples()) (s.label == Label::malware ? pos : neg).push_back(score(model, s));
    return partial_auc(pos, neg, fpr_cap);
}

std::vector<SlotMetrics> slot_confusion(const LinearModel& model, const Dataset& test, const DriftConfig& config,
                                        double fpr_cap) {
    require_compatible(model, test.dictionary());
    const SlotGrid grid = SlotGrid::for_dataset(test, config);

    std::vector<SlotMetrics> out(grid.count());
    std::vector<std::vector<double>> pos(grid.count()), neg(grid.count());
    for (std::size_t k = 0; k < grid.count(); ++k) {
        out[k].slot = k;
        out[k].bounds = grid.bounds(k);
    }
    for (const auto& s : test.samples()) {
        const std::size_t k = grid.slot_of(s.timestamp);
        const double sc = score(model, s);
        const bool flagged = sc >= 0.0;
        auto& m = out[k];
        if (s.label == Label::malware) {
            ++m.n_pos;
            ++(flagged ? m.true_pos : m.false_neg);
            pos[k].push_back(sc);
        } else {
            ++m.n_neg;
            ++(flagged ? m.false_pos : m.true_neg);
            neg[k].push_back(sc);
        }
    }
    for (std::size_t k = 0; k < grid.count(); ++k) {
        auto& m = out[k];
        if (m.true_pos + m.false_pos > 0)
            m.precision = static_cast<double>(m.true_pos) / static_cast<double>(m.true_pos + m.false_pos);
        if (m.n_pos > 0) m.recall = static_cast<double>(m.true_pos) / static_cast<double>(m.n_pos);
        if (m.n_pos > 0 && m.n_neg > 0) m.pauc = partial_auc(pos[k], neg[k], fpr_cap);
    }
    return out;
}

double decay_slope(std::span<const SeriesPoint> series) {
    const auto fit = fit_slope(series);
    if (fit.degenerate) throw DataError("decay slope needs at least two defined slots");
    return fit.slope;
}

std::vector<SeriesPoint> metric_series(std::span<const SlotMetrics> metrics, Metric metric) {
    std::vector<SeriesPoint> out;
    out.reserve(metrics.size());
    for (const auto& m : metrics) {
        const auto& v = metric == Metric::precision ? m.precision : metric == Metric::recall ? m.recall : m.pauc;
        out.push_back({static_cast<double>(m.slot), v});
    }
    return out;
}

}  // namespace driftguard
