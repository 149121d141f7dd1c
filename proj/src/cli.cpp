#include "driftguard/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "driftguard/io.hpp"
#include "driftguard/synth.hpp"

namespace driftguard::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::optional<double> slope_or_null(std::span<const SlotMetrics> metrics, Metric metric) {
    const auto series = metric_series(metrics, metric);
    const auto fit = fit_slope(series);
    if (fit.degenerate) return std::nullopt;
    return fit.slope;
}

ComparedModel evaluate_model(std::string id, LinearModel model, const Dataset& test, const ComparisonConfig& config) {
    ComparedModel out{std::move(id), std::move(model), std::nullopt, {}, {}, {}, {}, {}};
    out.metrics = slot_confusion(out.model, test, config.slots, config.fpr_cap);
    out.recall_slope = slope_or_null(out.metrics, Metric::recall);
    out.precision_slope = slope_or_null(out.metrics, Metric::precision);
    out.pauc_slope = slope_or_null(out.metrics, Metric::pauc);
    return out;
}

}  // namespace

Comparison run_comparison(const Dataset& dataset, const ComparisonConfig& config) {
    config.train.validate();
    config.slots.validate();
    Comparison result{temporal_split(dataset, {config.boundary}), {}, {}, {}, {}};
    const Dataset& train = result.split.train;
    const Dataset& test = result.split.test;

    LinearModel baseline = train_svm(train, config.train);
    DriftConfig analysis = config.slots;
    analysis.class_filter = Label::malware;
    result.drift = t_stability(baseline, train, analysis);
    const auto delta = result.drift.delta_vector();

    result.malware_trend = score_trend(baseline, test, config.slots, Label::malware);
    result.goodware_trend = score_trend(baseline, test, config.slots, Label::goodware);
    result.models.push_back(evaluate_model("svm", std::move(baseline), test, config));

    for (const auto& [id, bound] : {std::pair{"cb_h", config.bound_high}, std::pair{"cb_l", config.bound_low}}) {
        CbConfig cb{config.train, std::min(config.bounded_count, dataset.dimension()), bound};
        auto trained = train_svm_cb(train, delta, cb);
        auto compared = evaluate_model(id, std::move(trained.model), test, config);
        compared.bound = bound;
        compared.bounded = std::move(trained.bounded);
        result.models.push_back(std::move(compared));
    }
    return result;
}

namespace {

struct Options {
    std::string dataset;
    std::string model;
    std::string out;
    std::optional<Timestamp> boundary;
    std::string slot_mode = "month";
    Timestamp dt_seconds = 0;
    int iters = 2000;
    double eta0 = 7e-5;
    std::string schedule = "cosine";
    double l2 = 1.0;
    std::size_t nf = 100;
    double bound = 0.8;
    double fpr_cap = kDefaultFprCap;
    std::optional<std::uint64_t> seed;
    bool no_timestamp = false;
    std::string trend_out;

    SynthSpec synth = SynthSpec::reference();
};

TrainConfig train_config(const Options& o) {
    TrainConfig c;
    c.iterations = o.iters;
    c.initial_step = o.eta0;
    c.schedule = o.schedule == "constant" ? Schedule::constant : Schedule::cosine_annealing;
    c.l2_lambda = o.l2;
    c.seed = o.seed.value_or(0);
    c.validate();
    return c;
}

DriftConfig slot_config(const Options& o) {
    DriftConfig c = o.slot_mode == "fixed" ? DriftConfig::fixed(o.dt_seconds) : DriftConfig::monthly();
    if (o.slot_mode == "fixed" && o.dt_seconds <= 0) throw UsageError("--slot-mode fixed requires --dt-seconds > 0");
    c.validate();
    return c;
}

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                    std::chrono::system_clock::now())));
}

class Provenance {
public:
    Provenance(const Options& o, std::string command) {
        entries_.emplace_back("tool", "driftguard");
        entries_.emplace_back("command", std::move(command));
        if (!o.no_timestamp) entries_.emplace_back("generated_at", utc_now());
    }
    Provenance& add(std::string key, std::string value) {
        entries_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    Provenance& add(std::string key, double value) { return add(std::move(key), io::format_real(value)); }
    Provenance& add_train(const TrainConfig& c) {
        add("iters", std::to_string(c.iterations));
        add("eta0", c.initial_step);
        add("schedule", c.schedule == Schedule::constant ? "constant" : "cosine");
        add("l2", c.l2_lambda);
        return add("seed", std::to_string(c.seed));
    }
    Provenance& add_slots(const DriftConfig& c) {
        add("slot_mode", c.mode == SlotMode::calendar_month ? "month" : "fixed");
        if (c.mode == SlotMode::fixed_seconds) add("dt_seconds", std::to_string(c.slot_seconds));
        return *this;
    }
    const io::Provenance& entries() const { return entries_; }
    ordered_json json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [k, v] : entries_) j[k] = v;
        return j;
    }

private:
    io::Provenance entries_;
};

io::ModelFile model_file(const LinearModel& model, std::string kind, const Provenance& provenance,
                         std::optional<std::vector<FeatureIndex>> bounded = std::nullopt) {
    io::ModelFile file{model, {std::move(kind), {}, std::move(bounded)}};
    for (const auto& [k, v] : provenance.entries()) file.metadata.config.emplace_back(k, v);
    return file;
}

std::string dump_text(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream ss;
    writer(ss);
    return ss.str();
}

// Every output is rendered in memory first so an error leaves no files behind.
using Outputs = std::vector<std::pair<fs::path, std::string>>;

void commit(const Outputs& outputs) {
    for (const auto& [path, text] : outputs) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        io::write_file(path, [&](std::ostream& out) { out << text; });
    }
}

Dataset training_side(const Dataset& data, const Options& o) {
    return o.boundary ? temporal_split(data, {*o.boundary}).train : data;
}

Dataset test_side(const Dataset& data, const Options& o) {
    return o.boundary ? temporal_split(data, {*o.boundary}).test : data;
}

ordered_json nullable(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json slopes_json(const ComparedModel& m) {
    return {{"precision", nullable(m.precision_slope)},
            {"recall", nullable(m.recall_slope)},
            {"pauc", nullable(m.pauc_slope)}};
}

Outputs cmd_synth(const Options& o) {
    if (o.out.empty()) throw UsageError("synth requires --out");
    SynthSpec spec = o.synth;
    if (o.seed) spec.seed = *o.seed;
    const auto result = generate(spec);
    Provenance prov(o, "synth");
    prov.add("seed", std::to_string(spec.seed))
        .add("d", std::to_string(spec.d))
        .add("n_per_slot", std::to_string(spec.n_per_slot))
        .add("n_slots", std::to_string(spec.n_slots))
        .add("stable_pos", std::to_string(spec.stable_pos))
        .add("stable_neg", std::to_string(spec.stable_neg))
        .add("n_drift_up", std::to_string(spec.n_drift_up))
        .add("n_drift_down", std::to_string(spec.n_drift_down))
        .add("base_p", spec.base_p)
        .add("peak_p", spec.peak_p)
        .add("noise_p", spec.noise_p);
    ordered_json truth = ordered_json::parse(io::ground_truth_json(result.truth));
    ordered_json doc = {{"provenance", prov.json()}, {"planted", truth}};
    return {{o.out, dump_text([&](std::ostream& out) { io::save_dataset(result.dataset, out); })},
            {o.out + ".truth.json", doc.dump(2) + "\n"}};
}

Outputs cmd_train(const Options& o) {
    if (o.dataset.empty() || o.out.empty()) throw UsageError("train requires --dataset and --out");
    const TrainConfig config = train_config(o);
    const Dataset data = training_side(io::load_dataset(o.dataset), o);
    const LinearModel model = train_svm(data, config);
    Provenance prov(o, "train");
    prov.add("dataset", o.dataset).add_train(config);
    if (o.boundary) prov.add("boundary", std::to_string(*o.boundary));
    return {{o.out, dump_text([&](std::ostream& out) { io::save_model(model_file(model, "svm", prov), out); })}};
}

Outputs cmd_drift(const Options& o) {
    if (o.dataset.empty() || o.model.empty() || o.out.empty())
        throw UsageError("drift requires --dataset, --model and --out");
    const DriftConfig slots = slot_config(o);
    const Dataset data = io::load_dataset(o.dataset);
    const auto model = io::load_model(o.model);
    require_compatible(model.model, data.dictionary());

    const DriftReport report = t_stability(model.model, training_side(data, o), slots);
    Provenance prov(o, "drift");
    prov.add("dataset", o.dataset).add("model", o.model).add_slots(slots);
    if (o.boundary) prov.add("boundary", std::to_string(*o.boundary));
    Outputs outputs{{o.out, dump_text([&](std::ostream& out) { io::save_drift_report(report, prov.entries(), out); })}};
    if (!o.trend_out.empty()) {
        const Dataset test = test_side(data, o);
        for (const auto& [label, suffix] : {std::pair{Label::malware, "malware"}, std::pair{Label::goodware, "goodware"}}) {
            const auto trend = score_trend(model.model, test, slots, label);
            Provenance tp = prov;
            tp.add("class", suffix);
            outputs.emplace_back(o.trend_out + "." + suffix + ".csv",
                                 dump_text([&](std::ostream& out) { io::save_score_trend(trend, tp.entries(), out); }));
        }
    }
    return outputs;
}

Outputs cmd_train_cb(const Options& o) {
    if (o.dataset.empty() || o.model.empty() || o.out.empty())
        throw UsageError("train-cb requires --dataset, --model (reference classifier) and --out");
    CbConfig config{train_config(o), o.nf, o.bound};
    const DriftConfig slots = slot_config(o);
    const Dataset train = training_side(io::load_dataset(o.dataset), o);
    const auto reference = io::load_model(o.model);
    require_compatible(reference.model, train.dictionary());
    config.validate(train.dimension());

    const DriftReport report = t_stability(reference.model, train, slots);
    const CbResult result = train_svm_cb(train, report.delta_vector(), config);
    Provenance prov(o, "train-cb");
    prov.add("dataset", o.dataset).add("reference_model", o.model).add_train(config.base);
    prov.add("l2_effective", 0.0).add("nf", std::to_string(config.bounded_count)).add("bound", config.bound);
    prov.add_slots(slots);
    if (o.boundary) prov.add("boundary", std::to_string(*o.boundary));
    return {{o.out, dump_text([&](std::ostream& out) {
                 io::save_model(model_file(result.model, "svm-cb", prov, result.bounded), out);
             })}};
}

Outputs cmd_eval(const Options& o) {
    if (o.dataset.empty() || o.model.empty() || o.out.empty())
        throw UsageError("eval requires --dataset, --model and --out");
    const DriftConfig slots = slot_config(o);
    if (!(o.fpr_cap > 0.0 && o.fpr_cap <= 1.0)) throw UsageError("--fpr-cap must lie in (0, 1]");
    const Dataset test = test_side(io::load_dataset(o.dataset), o);
    const auto model = io::load_model(o.model);
    require_compatible(model.model, test.dictionary());

    ComparisonConfig cc;
    cc.slots = slots;
    cc.fpr_cap = o.fpr_cap;
    const ComparedModel evaluated = evaluate_model(fs::path(o.model).stem().string(), model.model, test, cc);

    Provenance prov(o, "eval");
    prov.add("dataset", o.dataset).add("model", o.model).add_slots(slots).add("fpr_cap", o.fpr_cap);
    if (o.boundary) prov.add("boundary", std::to_string(*o.boundary));
    ordered_json summary = {{"model", evaluated.id},
                            {"boundary", o.boundary ? ordered_json(*o.boundary) : ordered_json(nullptr)},
                            {"fpr_cap", o.fpr_cap},
                            {"decay_slope", slopes_json(evaluated)},
                            {"provenance", prov.json()}};
    return {{o.out, dump_text([&](std::ostream& out) { io::save_eval_report(evaluated.metrics, prov.entries(), out); })},
            {o.out + ".json", summary.dump(2) + "\n"}};
}

Outputs cmd_compare(const Options& o) {
    if (o.dataset.empty() || o.out.empty() || !o.boundary)
        throw UsageError("compare requires --dataset, --boundary and --out (a directory)");
    ComparisonConfig cc;
    cc.boundary = *o.boundary;
    cc.train = train_config(o);
    cc.bounded_count = o.nf;
    cc.slots = slot_config(o);
    cc.fpr_cap = o.fpr_cap;
    if (!(o.fpr_cap > 0.0 && o.fpr_cap <= 1.0)) throw UsageError("--fpr-cap must lie in (0, 1]");

    const Dataset data = io::load_dataset(o.dataset);
    const Comparison cmp = run_comparison(data, cc);

    Provenance prov(o, "compare");
    prov.add("dataset", o.dataset).add("boundary", std::to_string(cc.boundary)).add_train(cc.train);
    prov.add("nf", std::to_string(cc.bounded_count)).add("bound_high", cc.bound_high).add("bound_low", cc.bound_low);
    prov.add_slots(cc.slots).add("fpr_cap", cc.fpr_cap);

    const fs::path dir = o.out;
    Outputs outputs;
    outputs.emplace_back(dir / "drift.csv",
                         dump_text([&](std::ostream& out) { io::save_drift_report(cmp.drift, prov.entries(), out); }));
    outputs.emplace_back(dir / "trend_malware.csv", dump_text([&](std::ostream& out) {
                             io::save_score_trend(cmp.malware_trend, prov.entries(), out);
                         }));
    outputs.emplace_back(dir / "trend_goodware.csv", dump_text([&](std::ostream& out) {
                             io::save_score_trend(cmp.goodware_trend, prov.entries(), out);
                         }));

    ordered_json models = ordered_json::object();
    for (const auto& m : cmp.models) {
        Provenance mp = prov;
        mp.add("model", m.id);
        outputs.emplace_back(dir / ("eval_" + m.id + ".csv"),
                             dump_text([&](std::ostream& out) { io::save_eval_report(m.metrics, mp.entries(), out); }));
        std::optional<std::vector<FeatureIndex>> bounded;
        if (m.bound) {
            mp.add("bound", *m.bound).add("l2_effective", 0.0);
            bounded = m.bounded;
        }
        outputs.emplace_back(dir / (m.id + ".model"), dump_text([&](std::ostream& out) {
                                 io::save_model(model_file(m.model, m.bound ? "svm-cb" : "svm", mp, bounded), out);
                             }));
        const auto first_recall = std::find_if(m.metrics.begin(), m.metrics.end(),
                                               [](const SlotMetrics& s) { return s.recall.has_value(); });
        models[m.id] = {{"bound", m.bound ? ordered_json(*m.bound) : ordered_json(nullptr)},
                        {"bounded_features", m.bounded.size()},
                        {"initial_recall",
                         first_recall != m.metrics.end() ? ordered_json(*first_recall->recall) : ordered_json(nullptr)},
                        {"decay_slope", slopes_json(m)}};
    }
    ordered_json summary = {{"boundary", cc.boundary},
                            {"fpr_cap", cc.fpr_cap},
                            {"train_samples", cmp.split.train.size()},
                            {"test_samples", cmp.split.test.size()},
                            {"models", models},
                            {"provenance", prov.json()}};
    outputs.emplace_back(dir / "summary.json", summary.dump(2) + "\n");
    return outputs;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal feature stability analysis and time-hardened linear SVMs", "driftguard"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--seed", o.seed, "Random seed");
    app.add_flag("--no-provenance-timestamp", o.no_timestamp, "Omit the generation time from output headers");

    auto dataset_opt = [&](CLI::App* c) { c->add_option("--dataset", o.dataset, "Dataset file")->required(); };
    auto slot_opts = [&](CLI::App* c) {
        c->add_option("--slot-mode", o.slot_mode, "Time slot quantization")->check(CLI::IsMember({"month", "fixed"}));
        c->add_option("--dt-seconds", o.dt_seconds, "Slot width for --slot-mode fixed");
    };
    auto train_opts = [&](CLI::App* c) {
        c->add_option("--iters", o.iters, "Gradient descent iterations");
        c->add_option("--eta0", o.eta0, "Initial step size");
        c->add_option("--schedule", o.schedule, "Step size schedule")->check(CLI::IsMember({"constant", "cosine"}));
        c->add_option("--l2", o.l2, "L2 strength of the baseline SVM");
    };
    auto boundary_opt = [&](CLI::App* c, const char* help) { c->add_option("--boundary", o.boundary, help); };

    auto* synth = app.add_subcommand("synth", "Generate a planted-drift dataset and its ground truth");
    synth->add_option("--out", o.out, "Dataset output path (ground truth goes to <out>.truth.json)")->required();
    synth->add_option("--d", o.synth.d, "Dimensionality");
    synth->add_option("--n-per-slot", o.synth.n_per_slot, "Samples per class per month");
    synth->add_option("--slots", o.synth.n_slots, "Number of months");
    synth->add_option("--stable-pos", o.synth.stable_pos, "Stable malware-indicative features");
    synth->add_option("--stable-neg", o.synth.stable_neg, "Stable goodware-indicative features");
    synth->add_option("--drift-up", o.synth.n_drift_up, "Goodware-like features malware adopts");
    synth->add_option("--drift-down", o.synth.n_drift_down, "Malware features malware abandons");
    synth->add_option("--base-p", o.synth.base_p, "Low activation probability");
    synth->add_option("--peak-p", o.synth.peak_p, "High activation probability");
    synth->add_option("--noise-p", o.synth.noise_p, "Background activation probability");

    auto* train = app.add_subcommand("train", "Train the baseline linear SVM");
    dataset_opt(train);
    train->add_option("--out", o.out, "Model output path")->required();
    train_opts(train);
    boundary_opt(train, "Train only on samples before this epoch second");

    auto* drift = app.add_subcommand("drift", "Rank features by T-stability");
    dataset_opt(drift);
    drift->add_option("--model", o.model, "Reference model")->required();
    drift->add_option("--out", o.out, "Drift report CSV")->required();
    drift->add_option("--trend-out", o.trend_out, "Prefix for per-class score trend CSVs");
    slot_opts(drift);
    boundary_opt(drift, "Analyze samples before this epoch second; trends use the rest");

    auto* train_cb = app.add_subcommand("train-cb", "Train an SVM with bounded unstable weights");
    dataset_opt(train_cb);
    train_cb->add_option("--model", o.model, "Reference model used for drift analysis")->required();
    train_cb->add_option("--out", o.out, "Model output path")->required();
    train_cb->add_option("--nf", o.nf, "Number of unstable features to bound");
    train_cb->add_option("--bound", o.bound, "Absolute bound r on unstable weights");
    train_opts(train_cb);
    slot_opts(train_cb);
    boundary_opt(train_cb, "Train only on samples before this epoch second");

    auto* eval = app.add_subcommand("eval", "Per-slot precision, recall and partial AUC");
    dataset_opt(eval);
    eval->add_option("--model", o.model, "Model to evaluate")->required();
    eval->add_option("--out", o.out, "Evaluation CSV (summary goes to <out>.json)")->required();
    eval->add_option("--fpr-cap", o.fpr_cap, "FPR cap of the partial AUC");
    slot_opts(eval);
    boundary_opt(eval, "Evaluate only samples at or after this epoch second");

    auto* compare = app.add_subcommand("compare", "Baseline vs SVM-CB(H) vs SVM-CB(L) over time");
    dataset_opt(compare);
    compare->add_option("--out", o.out, "Output directory")->required();
    compare->add_option("--boundary", o.boundary, "Temporal split (epoch seconds)")->required();
    compare->add_option("--nf", o.nf, "Number of unstable features to bound");
    compare->add_option("--fpr-cap", o.fpr_cap, "FPR cap of the partial AUC");
    train_opts(compare);
    slot_opts(compare);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? ok : usage_error;
    }

    try {
        Outputs outputs;
        if (*synth) outputs = cmd_synth(o);
        else if (*train) outputs = cmd_train(o);
        else if (*drift) outputs = cmd_drift(o);
        else if (*train_cb) outputs = cmd_train_cb(o);
        else if (*eval) outputs = cmd_eval(o);
        else if (*compare) outputs = cmd_compare(o);
        commit(outputs);
        for (const auto& [path, text] : outputs) out << "wrote " << path.string() << '\n';
        return ok;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage_error;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return numeric_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace driftguard::cli
