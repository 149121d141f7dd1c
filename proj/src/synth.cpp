#include "driftguard/synth.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace driftguard {

namespace {

enum class Role { noise, stable_pos, stable_neg, drift_up, drift_down };

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Timestamp month_start(int year, unsigned month, std::size_t offset) {
    using namespace std::chrono;
    const year_month ym = std::chrono::year{year} / std::chrono::month{month} + months{static_cast<long>(offset)};
    return sys_seconds{sys_days{ym / 1}}.time_since_epoch().count();
}

}  // namespace

void SynthSpec::validate() const {
    if (d == 0) throw UsageError("synthetic dataset needs d >= 1");
    if (n_per_slot == 0 || n_slots == 0) throw UsageError("synthetic dataset needs at least one sample and one slot");
    if (stable_pos + stable_neg + n_drift_up + n_drift_down > d)
        throw UsageError(fmt::format("{} planted features do not fit in d={}",
                                     stable_pos + stable_neg + n_drift_up + n_drift_down, d));
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(base_p) || !in_unit(peak_p) || !in_unit(noise_p) || base_p > peak_p)
        throw UsageError("probabilities must satisfy 0 <= base_p <= peak_p <= 1 and noise_p in [0, 1]");
    if (start_month < 1 || start_month > 12) throw UsageError("start month must be in 1..12");
}

double planted_probability(const SynthSpec& spec, DriftGroup group, std::size_t slot) {
    const double progress =
        spec.n_slots > 1 ? static_cast<double>(slot) / static_cast<double>(spec.n_slots - 1) : 0.0;
    const double rise = (spec.peak_p - spec.base_p) * progress;
    return group == DriftGroup::up ? spec.base_p + rise : spec.peak_p - rise;
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    std::vector<FeatureIndex> order(spec.d);
    std::iota(order.begin(), order.end(), FeatureIndex{0});
    // Fisher-Yates with raw engine output so the layout does not depend on the library's shuffle.
    for (std::size_t i = spec.d; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    std::vector<Role> role(spec.d, Role::noise);
    GroundTruth truth;
    std::size_t next = 0;
    auto assign = [&](std::size_t count, Role r) {
        for (std::size_t i = 0; i < count; ++i) {
            const FeatureIndex j = order[next++];
            role[j] = r;
            if (r == Role::stable_pos) truth.stable_pos.push_back(j);
            if (r == Role::stable_neg) truth.stable_neg.push_back(j);
            if (r == Role::drift_up) truth.planted.push_back({j, DriftGroup::up, 1});
            if (r == Role::drift_down) truth.planted.push_back({j, DriftGroup::down, -1});
        }
    };
    assign(spec.stable_pos, Role::stable_pos);
    assign(spec.stable_neg, Role::stable_neg);
    assign(spec.n_drift_up, Role::drift_up);
    assign(spec.n_drift_down, Role::drift_down);
    std::sort(truth.stable_pos.begin(), truth.stable_pos.end());
    std::sort(truth.stable_neg.begin(), truth.stable_neg.end());
    std::sort(truth.planted.begin(), truth.planted.end(),
              [](const PlantedFeature& a, const PlantedFeature& b) { return a.index < b.index; });

    std::vector<SparseSample> samples;
    samples.reserve(2 * spec.n_per_slot * spec.n_slots);
    std::vector<double> p_mal(spec.d), p_good(spec.d);
    for (std::size_t k = 0; k < spec.n_slots; ++k) {
        const double up = planted_probability(spec, DriftGroup::up, k);
        const double down = planted_probability(spec, DriftGroup::down, k);
        for (std::size_t j = 0; j < spec.d; ++j) {
            switch (role[j]) {
                case Role::noise: p_mal[j] = p_good[j] = spec.noise_p; break;
                case Role::stable_pos: p_mal[j] = spec.peak_p; p_good[j] = spec.base_p; break;
                case Role::stable_neg: p_mal[j] = spec.base_p; p_good[j] = spec.peak_p; break;
                // Drift-up features look like goodware; malware adopts them over time.
                case Role::drift_up: p_mal[j] = up; p_good[j] = spec.peak_p; break;
                // Drift-down features mark malware; malware abandons them over time.
                case Role::drift_down: p_mal[j] = down; p_good[j] = spec.base_p; break;
            }
        }
        const Timestamp start = month_start(spec.start_year, spec.start_month, k);
        const Timestamp width = month_start(spec.start_year, spec.start_month, k + 1) - start;
        for (Label label : {Label::malware, Label::goodware}) {
            const auto& p = label == Label::malware ? p_mal : p_good;
            for (std::size_t i = 0; i < spec.n_per_slot; ++i) {
                SparseSample s;
                s.id = fmt::format("{}{:02}-{:05}", label == Label::malware ? 'm' : 'g', k, i);
                s.label = label;
                s.timestamp = start + static_cast<Timestamp>(unit(rng) * static_cast<double>(width));
                for (std::size_t j = 0; j < spec.d; ++j)
                    if (unit(rng) < p[j]) s.indices.push_back(static_cast<FeatureIndex>(j));
                samples.push_back(std::move(s));
            }
        }
    }
    return {Dataset(FeatureDictionary::numbered(spec.d), std::move(samples)), std::move(truth)};
}

}  // namespace driftguard
