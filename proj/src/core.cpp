#include "driftguard/core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace driftguard {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
}

}  // namespace

FeatureDictionary::FeatureDictionary(std::vector<std::string> names) : names_(std::move(names)) {
    lookup_.reserve(names_.size());
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, std::to_string(names_.size()));
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw DataError(fmt::format("feature {} has an empty name", i));
        if (!lookup_.emplace(names_[i], static_cast<FeatureIndex>(i)).second)
            throw DataError(fmt::format("duplicate feature name '{}'", names_[i]));
        // NUL separator keeps ("ab","c") and ("a","bc") apart.
        fnv_mix(h, std::string_view("\0", 1));
        fnv_mix(h, names_[i]);
    }
    fingerprint_ = h;
}

FeatureDictionary FeatureDictionary::numbered(std::size_t d) {
    std::vector<std::string> names;
    names.reserve(d);
    for (std::size_t i = 0; i < d; ++i) names.push_back("f" + std::to_string(i));
    return FeatureDictionary(std::move(names));
}

FeatureIndex FeatureDictionary::index_of(std::string_view name) const {
    auto it = lookup_.find(std::string(name));
    if (it == lookup_.end()) throw DataError(fmt::format("unknown feature '{}'", name));
    return it->second;
}

Dataset::Dataset(FeatureDictionary dictionary, std::vector<SparseSample> samples)
    : dictionary_(std::move(dictionary)), samples_(std::move(samples)) {
    const std::size_t d = dictionary_.size();
    for (const auto& s : samples_) {
        if (s.label != Label::goodware && s.label != Label::malware)
            throw DataError(fmt::format("sample '{}': label must be 0 or 1", s.id));
        for (std::size_t k = 0; k < s.indices.size(); ++k) {
            if (s.indices[k] >= d)
                throw DataError(
                    fmt::format("sample '{}': feature index {} out of range (d={})", s.id, s.indices[k], d));
            if (k > 0 && s.indices[k] <= s.indices[k - 1])
                throw DataError(fmt::format("sample '{}': feature indices must be strictly increasing", s.id));
        }
    }
}

Timestamp Dataset::min_time() const {
    if (samples_.empty()) throw DataError("empty dataset has no time range");
    return std::min_element(samples_.begin(), samples_.end(),
                            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; })
        ->timestamp;
}

Timestamp Dataset::max_time() const {
    if (samples_.empty()) throw DataError("empty dataset has no time range");
    return std::max_element(samples_.begin(), samples_.end(),
                            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; })
        ->timestamp;
}

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [label](const auto& s) { return s.label == label; }));
}

bool LinearModel::all_finite() const {
    return std::isfinite(bias) && std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

void require_compatible(const LinearModel& model, const FeatureDictionary& dictionary) {
    if (model.dimension() != dictionary.size())
        throw DataError(
            fmt::format("model has {} weights but the dictionary has d={}", model.dimension(), dictionary.size()));
    if (model.dictionary_fingerprint != dictionary.fingerprint())
        throw DataError(fmt::format("model fingerprint {:016x} does not match dictionary fingerprint {:016x}",
                                    model.dictionary_fingerprint, dictionary.fingerprint()));
}

double score(const LinearModel& model, const SparseSample& sample) {
    double sum = 0.0;
    for (FeatureIndex j : sample.indices) {
        if (j >= model.weights.size())
            throw DataError(fmt::format("sample '{}': feature index {} exceeds model dimensionality d={}", sample.id,
                                        j, model.weights.size()));
        sum += model.weights[j];
    }
    return sum + model.bias;
}

Label predict(const LinearModel& model, const SparseSample& sample) {
    return score(model, sample) >= 0.0 ? Label::malware : Label::goodware;
}

}  // namespace driftguard
