#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftguard/core.hpp"
#include "driftguard/drift.hpp"
#include "driftguard/eval.hpp"
#include "driftguard/synth.hpp"

namespace driftguard::io {

/// Ordered key/value pairs echoed as `# key=value` comment lines at the top of reports.
using Provenance = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal that is guaranteed to round-trip: 17 significant digits.
std::string format_real(double value);
/// Throws DataError unless the whole string parses as a double.
double parse_real(std::string_view text);

// Dataset file:
//   #driftguard-dataset v1 d=<d>
//   #feature <idx> <name>          (d lines, idx ascending from 0)
//   <id>\t<epoch>\t<label>\t<idx,idx,...>
void save_dataset(const Dataset& dataset, std::ostream& out);
/// Throws DataError naming the offending line on malformed input.
Dataset load_dataset(std::istream& in);

struct ModelMetadata {
    std::string kind = "svm";                                     // svm | svm-cb
    std::vector<std::pair<std::string, std::string>> config;     // written as config.<key>=<value>
    std::optional<std::vector<FeatureIndex>> bounded;             // SVM-CB only

    friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct ModelFile {
    LinearModel model;
    ModelMetadata metadata;
};

// Model file:
//   #driftguard-model v1
//   key=value lines (d, bias, fingerprint, encoding, kind, config.*, bounded)
//   w <idx> <value>                (every index when dense, non-zero ones when sparse)
// Sparse encoding is chosen when more than half of the weights are +0.
void save_model(const ModelFile& file, std::ostream& out);
ModelFile load_model(std::istream& in);
/// Also checks the stored fingerprint against `dictionary`.
ModelFile load_model(std::istream& in, const FeatureDictionary& dictionary);

void save_drift_report(const DriftReport& report, const Provenance& provenance, std::ostream& out);
void save_eval_report(std::span<const SlotMetrics> metrics, const Provenance& provenance, std::ostream& out);
void save_score_trend(std::span<const TrendPoint> trend, const Provenance& provenance, std::ostream& out);
/// {"<index>": {"group": "up"|"down", "planted_slope_sign": +1|-1}, ...}
std::string ground_truth_json(const GroundTruth& truth);

/// Writes through a sibling temporary file and renames it into place, so readers
/// never observe a partially written file. Throws DataError on I/O failure.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);
Dataset load_dataset(const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace driftguard::io
