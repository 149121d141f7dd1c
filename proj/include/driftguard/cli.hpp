#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftguard/core.hpp"
#include "driftguard/drift.hpp"
#include "driftguard/eval.hpp"
#include "driftguard/trainer.hpp"

namespace driftguard::cli {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, numeric_error = 3 };

/// Entry point of the `driftguard` executable.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ComparisonConfig {
    Timestamp boundary = 0;
    TrainConfig train{};       // baseline; CB models reuse it with l2 = 0
    std::size_t bounded_count = 100;
    double bound_high = 0.8;
    double bound_low = 0.2;
    DriftConfig slots = DriftConfig::monthly();
    double fpr_cap = kDefaultFprCap;
};

struct ComparedModel {
    std::string id;  // svm | cb_h | cb_l
    LinearModel model;
    std::optional<double> bound;
    std::vector<FeatureIndex> bounded;
    std::vector<SlotMetrics> metrics;
    std::optional<double> recall_slope;
    std::optional<double> precision_slope;
    std::optional<double> pauc_slope;
};

struct Comparison {
    TemporalSplit split;
    DriftReport drift;  // baseline analyzed on the training side
    std::vector<ComparedModel> models;
    std::vector<TrendPoint> malware_trend;   // baseline scores on the test side
    std::vector<TrendPoint> goodware_trend;
};

/// Temporal split, baseline SVM, drift analysis on the training side, CB-H and CB-L,
/// then per-slot evaluation of all three on the test side.
Comparison run_comparison(const Dataset& dataset, const ComparisonConfig& config);

}  // namespace driftguard::cli
