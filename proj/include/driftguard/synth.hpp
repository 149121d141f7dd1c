#pragma once

#include <cstdint>
#include <vector>

#include "driftguard/core.hpp"

namespace driftguard {

/// Parameters of a planted-drift binary dataset. Slots are consecutive calendar months
/// starting at `start_year`/`start_month` (UTC), so monthly slotting recovers them exactly.
struct SynthSpec {
    std::size_t d = 1000;
    std::size_t n_per_slot = 500;  // per class
    std::size_t n_slots = 24;
    std::size_t stable_pos = 2;
    std::size_t stable_neg = 2;
    std::size_t n_drift_up = 25;
    std::size_t n_drift_down = 25;
    double base_p = 0.0;
    double peak_p = 0.06;
    double noise_p = 0.005;
    std::uint64_t seed = 20140101;
    int start_year = 2014;
    unsigned start_month = 1;

    /// The 1000-feature, 24-month reference set used by the acceptance suite (seed 20140101).
    /// Activations are sparse so that the baseline's drift weights exceed both SVM-CB bounds.
    static SynthSpec reference() { return SynthSpec{}; }

    void validate() const;
};

enum class DriftGroup { up, down };

struct PlantedFeature {
    FeatureIndex index = 0;
    DriftGroup group = DriftGroup::up;
    int slope_sign = 1;  // sign of the malware-class frequency trend
};

struct GroundTruth {
    std::vector<PlantedFeature> planted;
    std::vector<FeatureIndex> stable_pos;
    std::vector<FeatureIndex> stable_neg;
};

struct SynthResult {
    Dataset dataset;
    GroundTruth truth;
};

/// Malware-class activation probability of a drift feature in slot k.
double planted_probability(const SynthSpec& spec, DriftGroup group, std::size_t slot);

/// Deterministic in `spec.seed`. Feature roles are scattered over indices by a seeded permutation.
SynthResult generate(const SynthSpec& spec);

}  // namespace driftguard
