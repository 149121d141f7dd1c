#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "driftguard/core.hpp"
#include "driftguard/drift.hpp"

namespace driftguard {

/// Train side: t < boundary. Test side: t >= boundary.
struct SplitSpec {
    Timestamp boundary = 0;
};

struct TemporalSplit {
    Dataset train;
    Dataset test;
};

/// Throws DataError when either side ends up empty.
TemporalSplit temporal_split(const Dataset& dataset, const SplitSpec& spec);

struct SlotMetrics {
    std::size_t slot = 0;
    SlotBounds bounds;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::size_t true_pos = 0;
    std::size_t false_pos = 0;
    std::size_t false_neg = 0;
    std::size_t true_neg = 0;
    std::optional<double> precision;  // nullopt when nothing was flagged
    std::optional<double> recall;     // nullopt when the slot has no malware
    std::optional<double> pauc;       // nullopt unless both classes are present
};

inline constexpr double kDefaultFprCap = 0.05;

/// Confusion counts, precision, recall and partial AUC for every slot of the test set.
/// Slot boundaries come from `config`; its class filter is ignored.
std::vector<SlotMetrics> slot_confusion(const LinearModel& model, const Dataset& test, const DriftConfig& config,
                                        double fpr_cap = kDefaultFprCap);

/// Area under the empirical ROC for FPR in [0, fpr_cap], divided by fpr_cap.
/// Equal scores form one threshold step, so ties contribute a diagonal segment.
double partial_auc(std::span<const double> positive_scores, std::span<const double> negative_scores, double fpr_cap);

/// Throws DataError unless both classes are present; UsageError unless 0 < fpr_cap <= 1.
double partial_auc(const LinearModel& model, const Dataset& samples, double fpr_cap);

/// Least-squares slope of a metric against slot index, skipping undefined slots.
/// Throws DataError with fewer than two defined points.
double decay_slope(std::span<const SeriesPoint> series);

enum class Metric { precision, recall, pauc };

/// Series of one metric over the slots, ready for decay_slope.
std::vector<SeriesPoint> metric_series(std::span<const SlotMetrics> metrics, Metric metric);

}  // namespace driftguard
