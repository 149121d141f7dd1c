#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftguard/core.hpp"

namespace driftguard {

enum class SlotMode { calendar_month, fixed_seconds };

struct DriftConfig {
    SlotMode mode = SlotMode::calendar_month;
    Timestamp slot_seconds = 0;  // used in fixed_seconds mode only
    Label class_filter = Label::malware;

    static DriftConfig monthly(Label filter = Label::malware) { return {SlotMode::calendar_month, 0, filter}; }
    static DriftConfig fixed(Timestamp dt, Label filter = Label::malware) {
        return {SlotMode::fixed_seconds, dt, filter};
    }

    void validate() const;
};

struct SlotBounds {
    Timestamp start = 0;
    Timestamp end = 0;  // exclusive, except for the final slot
};

/// Quantization of a time range into consecutive slots.
///
/// Fixed mode: slot k covers [t_min + k*dt, t_min + (k+1)*dt), T = ceil((t_max - t_min) / dt)
/// with a minimum of 1; t_max itself falls into the final slot.
/// Calendar mode: one slot per calendar month (UTC) from the month of t_min to the month of t_max.
class SlotGrid {
public:
    SlotGrid(Timestamp t_min, Timestamp t_max, const DriftConfig& config);
    /// Grid spanning the dataset's timestamps. Throws DataError on an empty dataset.
    static SlotGrid for_dataset(const Dataset& dataset, const DriftConfig& config);

    std::size_t count() const { return bounds_.size(); }
    const SlotBounds& bounds(std::size_t slot) const { return bounds_.at(slot); }
    /// Slot holding t; t must lie in [t_min, t_max].
    std::size_t slot_of(Timestamp t) const;

private:
    DriftConfig config_;
    Timestamp t_min_;
    Timestamp t_max_;
    std::vector<SlotBounds> bounds_;
};

/// Number of slots T spanned by the dataset.
std::size_t slot_count(const Dataset& dataset, const DriftConfig& config);

/// Per-slot mean feature vectors of the filtered class.
struct SlotMeans {
    std::size_t d = 0;
    std::vector<std::vector<double>> columns;  // columns[k][j] = mean of feature j in slot k
    std::vector<std::size_t> slot_counts;
    std::vector<SlotBounds> slot_bounds;

    std::size_t slots() const { return columns.size(); }
    bool empty_slot(std::size_t k) const { return slot_counts.at(k) == 0; }
    double at(std::size_t feature, std::size_t slot) const { return columns[slot][feature]; }
};

SlotMeans slot_means(const Dataset& dataset, const DriftConfig& config);

struct SeriesPoint {
    double slot = 0.0;
    std::optional<double> value;  // nullopt marks an empty slot
};

struct SlopeFit {
    double slope = 0.0;
    bool degenerate = false;  // fewer than two usable points
};

/// Ordinary least-squares slope of value against slot; undefined points are skipped.
SlopeFit fit_slope(std::span<const SeriesPoint> series);

struct DriftRecord {
    FeatureIndex index = 0;
    std::string name;
    double weight = 0.0;
    double slope = 0.0;
    double delta = 0.0;
    bool observed = true;  // false when the feature never fires in the analyzed class
};

struct DriftReport {
    std::vector<DriftRecord> records;  // sorted by delta ascending, ties by index
    SlotMeans means;

    /// delta indexed by feature.
    std::vector<double> delta_vector() const;
    std::vector<FeatureIndex> bottom(std::size_t n) const;
};

/// delta = weights * slopes elementwise, as records sorted by delta ascending (ties by index).
std::vector<DriftRecord> rank_by_delta(const FeatureDictionary& dictionary, std::span<const double> weights,
                                       std::span<const double> slopes);

/// Per-feature T-stability delta_j = w_j * m_j, m_j being the slope of the feature's
/// per-slot mean in the filtered class.
DriftReport t_stability(const LinearModel& model, const Dataset& dataset, const DriftConfig& config);

struct ScoreStats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    double min = 0.0;
    double max = 0.0;
};

struct TrendPoint {
    std::size_t slot = 0;
    SlotBounds bounds;
    std::size_t count = 0;
    std::optional<ScoreStats> stats;
};

/// Score statistics per slot over samples of `label`; slot boundaries come from the whole dataset.
std::vector<TrendPoint> score_trend(const LinearModel& model, const Dataset& dataset, const DriftConfig& config,
                                    Label label);

}  // namespace driftguard
