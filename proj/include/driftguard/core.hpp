#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "driftguard/error.hpp"

namespace driftguard {

using FeatureIndex = std::uint32_t;
using Timestamp = std::int64_t;  // epoch seconds

enum class Label : std::uint8_t { goodware = 0, malware = 1 };

/// Maps a {0,1} label onto the {-1,+1} hinge convention.
constexpr double signed_label(Label label) { return label == Label::malware ? 1.0 : -1.0; }

/// Ordered set of unique feature names; a name's position is its index.
class FeatureDictionary {
public:
    FeatureDictionary() = default;
    explicit FeatureDictionary(std::vector<std::string> names);

    /// Dictionary with names "f0".."f{d-1}".
    static FeatureDictionary numbered(std::size_t d);

    std::size_t size() const { return names_.size(); }
    const std::string& name(FeatureIndex index) const { return names_.at(index); }
    const std::vector<std::string>& names() const { return names_; }
    /// Throws DataError for an unknown name.
    FeatureIndex index_of(std::string_view name) const;

    /// FNV-1a over d and every name; binds models to the dictionary they were trained on.
    std::uint64_t fingerprint() const { return fingerprint_; }

    friend bool operator==(const FeatureDictionary& a, const FeatureDictionary& b) {
        return a.names_ == b.names_;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, FeatureIndex> lookup_;
    std::uint64_t fingerprint_ = 0;
};

/// One timestamped, labeled binary feature vector stored as its active indices.
struct SparseSample {
    std::string id;
    Timestamp timestamp = 0;
    Label label = Label::goodware;
    std::vector<FeatureIndex> indices;  // strictly increasing

    friend bool operator==(const SparseSample&, const SparseSample&) = default;
};

/// Immutable collection of samples validated against a dictionary.
class Dataset {
public:
    Dataset() = default;
    /// Throws DataError if any sample has unsorted, duplicate, or out-of-range indices.
    Dataset(FeatureDictionary dictionary, std::vector<SparseSample> samples);

    const FeatureDictionary& dictionary() const { return dictionary_; }
    std::span<const SparseSample> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t dimension() const { return dictionary_.size(); }

    /// Throws DataError on an empty dataset.
    Timestamp min_time() const;
    Timestamp max_time() const;

    std::size_t count(Label label) const;
    bool has_both_classes() const { return count(Label::malware) > 0 && count(Label::goodware) > 0; }

    /// Subset sharing this dataset's dictionary, in original sample order.
    template <typename Predicate>
    Dataset filter(Predicate keep) const {
        std::vector<SparseSample> kept;
        for (const auto& s : samples_)
            if (keep(s)) kept.push_back(s);
        return Dataset(dictionary_, std::move(kept), trusted_tag{});
    }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.dictionary_ == b.dictionary_ && a.samples_ == b.samples_;
    }

private:
    struct trusted_tag {};
    Dataset(FeatureDictionary dictionary, std::vector<SparseSample> samples, trusted_tag)
        : dictionary_(std::move(dictionary)), samples_(std::move(samples)) {}

    FeatureDictionary dictionary_;
    std::vector<SparseSample> samples_;
};

/// Linear scorer f(x) = w.x + b bound to a dictionary by fingerprint.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::uint64_t dictionary_fingerprint = 0;

    static LinearModel zeros(const FeatureDictionary& dictionary) {
        return {std::vector<double>(dictionary.size(), 0.0), 0.0, dictionary.fingerprint()};
    }

    std::size_t dimension() const { return weights.size(); }
    bool all_finite() const;

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Throws DataError when the model was not built for this dictionary.
void require_compatible(const LinearModel& model, const FeatureDictionary& dictionary);

/// Sum of the selected weights plus bias. Throws DataError if an index is >= d.
double score(const LinearModel& model, const SparseSample& sample);

/// Malware (1) iff score >= 0.
Label predict(const LinearModel& model, const SparseSample& sample);

}  // namespace driftguard
