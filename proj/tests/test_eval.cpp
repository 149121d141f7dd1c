#include <doctest.h>

#include <cmath>
#include <random>

#include "driftguard/eval.hpp"
#include "oracles.hpp"

using namespace driftguard;

namespace {

SparseSample at(Timestamp t, std::vector<FeatureIndex> idx, Label label) {
    return {"s" + std::to_string(t), t, label, std::move(idx)};
}

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, int levels) {
    // A small number of levels forces ties.
    std::uniform_int_distribution<int> pick(0, levels - 1);
    std::vector<double> out(n);
    for (double& s : out) s = pick(rng) * 0.25 - 1.0;
    return out;
}

}  // namespace

TEST_CASE("temporal split") {
    const auto dict = FeatureDictionary::numbered(1);
    const Dataset four(dict, {at(1, {}, Label::malware), at(2, {}, Label::goodware), at(3, {}, Label::malware),
                              at(4, {}, Label::goodware)});
    const auto split = temporal_split(four, {3});
    REQUIRE(split.train.size() == 2);
    REQUIRE(split.test.size() == 2);
    CHECK(split.train.samples()[0].timestamp == 1);
    CHECK(split.train.samples()[1].timestamp == 2);
    CHECK(split.test.samples()[0].timestamp == 3);
    CHECK(split.test.samples()[1].timestamp == 4);

    CHECK_THROWS_AS(temporal_split(four, {1}), DataError);
    CHECK_THROWS_AS(temporal_split(four, {0}), DataError);
    CHECK_THROWS_AS(temporal_split(four, {5}), DataError);
    CHECK_NOTHROW(temporal_split(four, {4}));
}

TEST_CASE("temporal split is a time-ordered partition") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto data = oracle::random_dataset(rng, 5, 60, 0.3, 0, 1000);
        std::uniform_int_distribution<Timestamp> pick(data.min_time() + 1, data.max_time());
        const Timestamp boundary = pick(rng);
        const auto split = temporal_split(data, {boundary});
        CHECK(split.train.size() + split.test.size() == data.size());
        for (const auto& s : split.train.samples()) CHECK(s.timestamp < boundary);
        for (const auto& s : split.test.samples()) CHECK(s.timestamp >= boundary);
        CHECK(split.train.dictionary().fingerprint() == data.dictionary().fingerprint());
    }
}

TEST_CASE("slot confusion: perfect slot and undefined metrics") {
    const auto dict = FeatureDictionary::numbered(2);
    auto model = LinearModel::zeros(dict);
    model.weights = {1.0, -1.0};
    model.bias = -0.5;
    // slot 0: perfect; slot 1: goodware only; slot 2: malware missed
    const Dataset test(dict, {at(0, {0}, Label::malware), at(1, {1}, Label::goodware), at(2, {0}, Label::malware),
                              at(4, {1}, Label::goodware), at(7, {1}, Label::malware)});
    const auto m = slot_confusion(model, test, DriftConfig::fixed(3));
    REQUIRE(m.size() == 3);
    CHECK(m[0].n_pos == 2);
    CHECK(m[0].n_neg == 1);
    CHECK(m[0].precision == 1.0);
    CHECK(m[0].recall == 1.0);
    CHECK(m[0].pauc == 1.0);

    CHECK(m[1].n_pos == 0);
    CHECK_FALSE(m[1].recall);
    CHECK_FALSE(m[1].precision);
    CHECK_FALSE(m[1].pauc);
    CHECK(m[1].true_neg == 1);

    CHECK(m[2].recall == 0.0);
    CHECK_FALSE(m[2].precision);
    CHECK(m[2].false_neg == 1);

    CHECK_THROWS_AS(slot_confusion(LinearModel::zeros(FeatureDictionary::numbered(3)), test, DriftConfig::fixed(3)),
                    DataError);
}

TEST_CASE("slot confusion matches a per-sample loop") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto data = oracle::random_dataset(rng, 12, 150, 0.3);
        const auto model = oracle::random_model(rng, data.dictionary());
        const auto cfg = DriftConfig::monthly();
        const auto metrics = slot_confusion(model, data, cfg);
        const SlotGrid grid = SlotGrid::for_dataset(data, cfg);
        REQUIRE(metrics.size() == grid.count());
        for (const auto& m : metrics) {
            std::size_t tp = 0, fp = 0, fn = 0, tn = 0, n = 0;
            for (const auto& s : data.samples()) {
                if (grid.slot_of(s.timestamp) != m.slot) continue;
                ++n;
                const bool flagged = oracle::dense_score(model, s) >= 0.0;
                const bool malware = s.label == Label::malware;
                tp += flagged && malware;
                fp += flagged && !malware;
                fn += !flagged && malware;
                tn += !flagged && !malware;
            }
            CHECK(m.true_pos == tp);
            CHECK(m.false_pos == fp);
            CHECK(m.false_neg == fn);
            CHECK(m.true_neg == tn);
            CHECK(m.true_pos + m.false_pos + m.false_neg + m.true_neg == n);
            CHECK(m.n_pos + m.n_neg == n);
            if (tp + fp > 0) CHECK(*m.precision == static_cast<double>(tp) / static_cast<double>(tp + fp));
            else CHECK_FALSE(m.precision);
            if (tp + fn > 0) CHECK(*m.recall == static_cast<double>(tp) / static_cast<double>(tp + fn));
            else CHECK_FALSE(m.recall);
        }
    }
}

TEST_CASE("partial AUC: hand cases") {
    const std::vector<double> pos{2.0, 1.0}, neg{1.5, 0.0};
    CHECK(oracle::enumerated_pauc(pos, neg, 0.5) == doctest::Approx(0.5));
    CHECK(partial_auc(pos, neg, 0.5) == doctest::Approx(oracle::enumerated_pauc(pos, neg, 0.5)).epsilon(1e-12));
    CHECK(partial_auc(pos, neg, 0.05) == doctest::Approx(0.5));
    CHECK(partial_auc(pos, neg, 1.0) == doctest::Approx(0.75));

    // perfect separator
    CHECK(partial_auc(std::vector{3.0, 2.0}, std::vector{1.0, -1.0, 0.0}, 0.05) == 1.0);
    CHECK(partial_auc(std::vector{3.0, 2.0}, std::vector{1.0, -1.0, 0.0}, 1.0) == 1.0);

    // all tied: the ROC is the diagonal
    CHECK(partial_auc(std::vector{1.0, 1.0}, std::vector{1.0, 1.0, 1.0}, 0.05) == doctest::Approx(0.025));
    // a tie straddling the cap is interpolated
    CHECK(partial_auc(std::vector{2.0, 1.0}, std::vector{1.0, 0.0}, 0.25) == doctest::Approx(0.625));

    const std::array<std::vector<double>, 4> hand_pos{{{0.9, 0.4, 0.4}, {1, 2, 3, 4}, {0.0}, {5, 5, 1}}};
    const std::array<std::vector<double>, 4> hand_neg{{{0.4, 0.1, 0.95, 0.3}, {4, 3, 2, 1}, {0.0, 1.0}, {5, 0, 1, 2}}};
    for (std::size_t i = 0; i < hand_pos.size(); ++i)
        for (double cap : {0.05, 0.25, 0.5, 1.0})
            CHECK(partial_auc(hand_pos[i], hand_neg[i], cap) ==
                  doctest::Approx(oracle::enumerated_pauc(hand_pos[i], hand_neg[i], cap)).epsilon(1e-12));

    CHECK_THROWS_AS(partial_auc(std::vector<double>{}, neg, 0.05), DataError);
    CHECK_THROWS_AS(partial_auc(pos, neg, 0.0), UsageError);
    CHECK_THROWS_AS(partial_auc(pos, neg, 1.5), UsageError);
}

TEST_CASE("partial AUC at cap 1 is the pairwise AUC") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> size(1, 25);
    for (int trial = 0; trial < 300; ++trial) {
        const auto pos = random_scores(rng, size(rng), trial % 2 ? 5 : 1000);
        const auto neg = random_scores(rng, size(rng), trial % 2 ? 5 : 1000);
        CHECK(std::abs(partial_auc(pos, neg, 1.0) - oracle::pairwise_auc(pos, neg)) <= 1e-9);
    }
}

TEST_CASE("partial AUC matches threshold enumeration and grows with the cap") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<std::size_t> size(1, 30);
    std::uniform_real_distribution<double> cap_of(0.01, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto pos = random_scores(rng, size(rng), 8);
        const auto neg = random_scores(rng, size(rng), 8);
        const double cap = cap_of(rng);
        CHECK(std::abs(partial_auc(pos, neg, cap) - oracle::enumerated_pauc(pos, neg, cap)) <= 1e-9);
        double prev = 0.0;
        for (double c = 0.05; c <= 1.0; c += 0.05) {
            const double area = partial_auc(pos, neg, c) * c;
            CHECK(area >= prev - 1e-12);
            CHECK(partial_auc(pos, neg, c) >= 0.0);
            CHECK(partial_auc(pos, neg, c) <= 1.0 + 1e-12);
            prev = area;
        }
    }
}

TEST_CASE("partial AUC of label-independent scores is near the chance level") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double cap : {0.05, 0.2, 0.5}) {
        double total = 0.0;
        const int runs = 20;
        for (int r = 0; r < runs; ++r) {
            std::vector<double> pos(2000), neg(2000);
            for (double& s : pos) s = g(rng);
            for (double& s : neg) s = g(rng);
            total += partial_auc(pos, neg, cap);
        }
        // The diagonal ROC covers cap^2 / 2; normalized, cap / 2.
        CHECK(std::abs(total / runs - cap / 2.0) <= 0.02);
    }
}

TEST_CASE("partial AUC over a model and dataset") {
    std::mt19937_64 rng(13);
    const auto data = oracle::random_dataset(rng, 10, 80, 0.4);
    const auto model = oracle::random_model(rng, data.dictionary());
    std::vector<double> pos, neg;
    for (const auto& s : data.samples())
        (s.label == Label::malware ? pos : neg).push_back(oracle::dense_score(model, s));
    CHECK(partial_auc(model, data, 0.05) == doctest::Approx(oracle::enumerated_pauc(pos, neg, 0.05)).epsilon(1e-9));

    const auto only_malware = data.filter([](const SparseSample& s) { return s.label == Label::malware; });
    CHECK_THROWS_AS(partial_auc(model, only_malware, 0.05), DataError);
}

TEST_CASE("decay slope") {
    auto series = [](std::vector<std::optional<double>> v) {
        std::vector<SeriesPoint> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back({static_cast<double>(k), v[k]});
        return out;
    };
    CHECK(decay_slope(series({0.7, 0.7, 0.7, 0.7})) == 0.0);
    CHECK(decay_slope(series({0.8, 0.6, 0.4})) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(decay_slope(series({0.8, std::nullopt, 0.4})) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK_THROWS_AS(decay_slope(series({0.8})), DataError);
    CHECK_THROWS_AS(decay_slope(series({0.8, std::nullopt})), DataError);

    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SeriesPoint> pts;
        std::vector<std::pair<double, double>> xy;
        for (int k = 0; k < 16; ++k) {
            if (u(rng) < 0.15) {
                pts.push_back({static_cast<double>(k), std::nullopt});
                continue;
            }
            const double v = u(rng);
            pts.push_back({static_cast<double>(k), v});
            xy.emplace_back(k, v);
        }
        if (xy.size() < 2) continue;
        const double expect = oracle::normal_equation_slope(xy);
        CHECK(std::abs(decay_slope(pts) - expect) <= 1e-9);
    }
}

TEST_CASE("metric series exposes each metric and keeps undefined slots") {
    std::vector<SlotMetrics> m(3);
    for (std::size_t k = 0; k < 3; ++k) m[k].slot = k;
    m[0].recall = 0.9;
    m[2].recall = 0.5;
    m[1].precision = 0.4;
    m[0].pauc = 0.3;
    const auto recall = metric_series(m, Metric::recall);
    REQUIRE(recall.size() == 3);
    CHECK(recall[0].value == 0.9);
    CHECK_FALSE(recall[1].value);
    CHECK(recall[2].slot == 2.0);
    CHECK(metric_series(m, Metric::precision)[1].value == 0.4);
    CHECK(metric_series(m, Metric::pauc)[0].value == 0.3);
}
