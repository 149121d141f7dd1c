#include "driftguard/drift.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace driftguard {

namespace {

using namespace std::chrono;

year_month month_of(Timestamp t) {
    const year_month_day ymd{floor<days>(sys_seconds{seconds{t}})};
    return ymd.year() / ymd.month();
}

Timestamp month_start(year_month ym) {
    return sys_seconds{sys_days{ym / 1}}.time_since_epoch().count();
}

long months_between(year_month from, year_month to) {
    return (static_cast<int>(to.year()) - static_cast<int>(from.year())) * 12L +
           (static_cast<long>(static_cast<unsigned>(to.month())) - static_cast<long>(static_cast<unsigned>(from.month())));
}

}  // namespace

void DriftConfig::validate() const {
    if (mode == SlotMode::fixed_seconds && slot_seconds <= 0)
        throw UsageError(fmt::format("slot width must be positive (got {} s)", slot_seconds));
}

SlotGrid::SlotGrid(Timestamp t_min, Timestamp t_max, const DriftConfig& config)
    : config_(config), t_min_(t_min), t_max_(t_max) {
    config.validate();
    if (t_max < t_min) throw DataError("time range is inverted");
    if (config.mode == SlotMode::fixed_seconds) {
        const Timestamp dt = config.slot_seconds;
        const Timestamp span = t_max - t_min;
        const std::size_t slots = std::max<Timestamp>(1, (span + dt - 1) / dt);
        bounds_.reserve(slots);
        for (std::size_t k = 0; k < slots; ++k)
            bounds_.push_back({t_min + static_cast<Timestamp>(k) * dt, t_min + static_cast<Timestamp>(k + 1) * dt});
    } else {
        const year_month first = month_of(t_min);
        const long slots = months_between(first, month_of(t_max)) + 1;
        bounds_.reserve(static_cast<std::size_t>(slots));
        for (long k = 0; k < slots; ++k)
            bounds_.push_back({month_start(first + months{k}), month_start(first + months{k + 1})});
    }
}

SlotGrid SlotGrid::for_dataset(const Dataset& dataset, const DriftConfig& config) {
    if (dataset.empty()) throw DataError("cannot slot an empty dataset");
    return SlotGrid(dataset.min_time(), dataset.max_time(), config);
}

std::size_t SlotGrid::slot_of(Timestamp t) const {
    if (t < t_min_ || t > t_max_)
        throw DataError(fmt::format("timestamp {} outside slotted range [{}, {}]", t, t_min_, t_max_));
    std::size_t k = 0;
    if (config_.mode == SlotMode::fixed_seconds)
        k = static_cast<std::size_t>((t - t_min_) / config_.slot_seconds);
    else
        k = static_cast<std::size_t>(months_between(month_of(t_min_), month_of(t)));
    return std::min(k, bounds_.size() - 1);
}

std::size_t slot_count(const Dataset& dataset, const DriftConfig& config) {
    return SlotGrid::for_dataset(dataset, config).count();
}

SlotMeans slot_means(const Dataset& dataset, const DriftConfig& config) {
    const SlotGrid grid = SlotGrid::for_dataset(dataset, config);
    SlotMeans out;
    out.d = dataset.dimension();
    out.columns.assign(grid.count(), std::vector<double>(out.d, 0.0));
    out.slot_counts.assign(grid.count(), 0);
    for (std::size_t k = 0; k < grid.count(); ++k) out.slot_bounds.push_back(grid.bounds(k));

    for (const auto& s : dataset.samples()) {
        if (s.label != config.class_filter) continue;
        const std::size_t k = grid.slot_of(s.timestamp);
        ++out.slot_counts[k];
        for (FeatureIndex j : s.indices) out.columns[k][j] += 1.0;
    }
    for (std::size_t k = 0; k < grid.count(); ++k) {
        if (out.slot_counts[k] == 0) continue;
        const double n = static_cast<double>(out.slot_counts[k]);
        for (double& v : out.columns[k]) v /= n;
    }
    return out;
}

SlopeFit fit_slope(std::span<const SeriesPoint> series) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (const auto& p : series) {
        if (!p.value) continue;
        sx += p.slot;
        sy += *p.value;
        ++n;
    }
    if (n < 2) return {0.0, true};
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : series) {
        if (!p.value) continue;
        const double dx = p.slot - mx;
        sxy += dx * (*p.value - my);
        sxx += dx * dx;
    }
    // Two or more points at the same slot carry no slope information.
    if (sxx == 0.0) return {0.0, true};
    return {sxy / sxx, false};
}

std::vector<double> DriftReport::delta_vector() const {
    std::vector<double> delta(records.size(), 0.0);
    for (const auto& r : records) delta.at(r.index) = r.delta;
    return delta;
}

std::vector<FeatureIndex> DriftReport::bottom(std::size_t n) const {
    std::vector<FeatureIndex> out;
    for (std::size_t i = 0; i < std::min(n, records.size()); ++i) out.push_back(records[i].index);
    return out;
}

std::vector<DriftRecord> rank_by_delta(const FeatureDictionary& dictionary, std::span<const double> weights,
                                       std::span<const double> slopes) {
    if (weights.size() != dictionary.size() || slopes.size() != dictionary.size())
        throw DataError(fmt::format("rank_by_delta: expected {} weights and slopes, got {} and {}", dictionary.size(),
                                    weights.size(), slopes.size()));
    std::vector<DriftRecord> records;
    records.reserve(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const auto idx = static_cast<FeatureIndex>(j);
        records.push_back({idx, dictionary.name(idx), weights[j], slopes[j], weights[j] * slopes[j], true});
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const DriftRecord& a, const DriftRecord& b) { return a.delta < b.delta; });
    return records;
}

DriftReport t_stability(const LinearModel& model, const Dataset& dataset, const DriftConfig& config) {
    require_compatible(model, dataset.dictionary());
    DriftReport report;
    report.means = slot_means(dataset, config);
    const SlotMeans& m = report.means;

    std::vector<bool> seen(m.d, false);
    for (std::size_t k = 0; k < m.slots(); ++k)
        for (std::size_t j = 0; j < m.d; ++j)
            if (m.columns[k][j] > 0.0) seen[j] = true;

    std::vector<SeriesPoint> row(m.slots());
    std::vector<double> slopes(m.d, 0.0);
    for (std::size_t j = 0; j < m.d; ++j) {
        if (!seen[j]) continue;
        for (std::size_t k = 0; k < m.slots(); ++k) {
            row[k].slot = static_cast<double>(k);
            row[k].value = m.empty_slot(k) ? std::nullopt : std::optional<double>(m.columns[k][j]);
        }
        slopes[j] = fit_slope(row).slope;
    }
    report.records = rank_by_delta(dataset.dictionary(), model.weights, slopes);
    for (auto& r : report.records) r.observed = seen[r.index];
    return report;
}

std::vector<TrendPoint> score_trend(const LinearModel& model, const Dataset& dataset, const DriftConfig& config,
                                    Label label) {
    require_compatible(model, dataset.dictionary());
    const SlotGrid grid = SlotGrid::for_dataset(dataset, config);
    std::vector<std::vector<double>> scores(grid.count());
    for (const auto& s : dataset.samples())
        if (s.label == label) scores[grid.slot_of(s.timestamp)].push_back(score(model, s));

    std::vector<TrendPoint> out;
    out.reserve(grid.count());
    for (std::size_t k = 0; k < grid.count(); ++k) {
        TrendPoint p{k, grid.bounds(k), scores[k].size(), std::nullopt};
        if (!scores[k].empty()) {
            const auto& v = scores[k];
            double sum = 0.0;
            for (double x : v) sum += x;
            const double mean = sum / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            p.stats = ScoreStats{mean, std::sqrt(ss / static_cast<double>(v.size())), *lo, *hi};
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace driftguard
