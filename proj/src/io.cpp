#include "driftguard/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace driftguard::io {

namespace {

constexpr std::string_view kDatasetMagic = "#driftguard-dataset";
constexpr std::string_view kModelMagic = "#driftguard-model";
constexpr std::string_view kVersion = "v1";

[[noreturn]] void fail(std::size_t line, std::string_view what) {
    throw DataError(fmt::format("line {}: {}", line, what));
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view text, int base = 10) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : "null"; }

void write_provenance(std::ostream& out, std::string_view title, const Provenance& provenance) {
    out << "# " << title << '\n';
    for (const auto& [key, value] : provenance) out << "# " << key << '=' << value << '\n';
}

std::string join_indices(std::span<const FeatureIndex> indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(indices[i]);
    }
    return out;
}

std::vector<FeatureIndex> parse_indices(std::string_view field, std::size_t line_no) {
    std::vector<FeatureIndex> out;
    if (field.empty()) return out;
    for (auto token : split(field, ',')) {
        if (token.find(':') != std::string_view::npos)
            fail(line_no, fmt::format("real-valued feature '{}' is not supported; features are binary", token));
        const auto idx = parse_int<FeatureIndex>(token);
        if (!idx) fail(line_no, fmt::format("bad feature index '{}'", token));
        out.push_back(*idx);
    }
    return out;
}

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

double parse_real(std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw DataError(fmt::format("'{}' is not a real number", text));
    return value;
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
    const auto& dict = dataset.dictionary();
    out << kDatasetMagic << ' ' << kVersion << " d=" << dict.size() << '\n';
    for (std::size_t j = 0; j < dict.size(); ++j)
        out << "#feature " << j << ' ' << dict.name(static_cast<FeatureIndex>(j)) << '\n';
    for (const auto& s : dataset.samples())
        out << s.id << '\t' << s.timestamp << '\t' << static_cast<int>(s.label) << '\t' << join_indices(s.indices)
            << '\n';
}

Dataset load_dataset(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) fail(line_no, "empty file; expected dataset header");
    strip_cr(line);
    const auto header = split(line, ' ');
    if (header.size() != 3 || header[0] != kDatasetMagic) fail(line_no, "not a driftguard dataset file");
    if (header[1] != kVersion) fail(line_no, fmt::format("unsupported dataset format version '{}'", header[1]));
    if (header[2].substr(0, 2) != "d=") fail(line_no, "header lacks d=<dimensionality>");
    const auto d = parse_int<std::size_t>(header[2].substr(2));
    if (!d) fail(line_no, "bad dimensionality in header");

    std::vector<std::string> names;
    names.reserve(*d);
    while (names.size() < *d) {
        if (!std::getline(in, line))
            fail(line_no, fmt::format("file ends after {} of {} feature lines", names.size(), *d));
        ++line_no;
        strip_cr(line);
        constexpr std::string_view prefix = "#feature ";
        if (line.rfind(prefix, 0) != 0) fail(line_no, "expected '#feature <idx> <name>'");
        const std::string_view rest = std::string_view(line).substr(prefix.size());
        const auto space = rest.find(' ');
        if (space == std::string_view::npos) fail(line_no, "feature line lacks a name");
        const auto idx = parse_int<std::size_t>(rest.substr(0, space));
        if (!idx || *idx != names.size()) fail(line_no, fmt::format("expected feature index {}", names.size()));
        names.emplace_back(rest.substr(space + 1));
    }

    FeatureDictionary dictionary = [&] {
        try {
            return FeatureDictionary(std::move(names));
        } catch (const DataError& e) {
            fail(line_no, e.what());
        }
    }();

    std::vector<SparseSample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 4)
            fail(line_no, fmt::format("expected 4 tab-separated fields, found {}", fields.size()));
        SparseSample s;
        s.id = std::string(fields[0]);
        if (s.id.empty()) fail(line_no, "empty sample id");
        const auto t = parse_int<Timestamp>(fields[1]);
        if (!t) fail(line_no, fmt::format("bad timestamp '{}'", fields[1]));
        s.timestamp = *t;
        if (fields[2] == "1")
            s.label = Label::malware;
        else if (fields[2] == "0")
            s.label = Label::goodware;
        else
            fail(line_no, fmt::format("label must be 0 or 1, found '{}'", fields[2]));
        s.indices = parse_indices(fields[3], line_no);
        for (std::size_t k = 0; k < s.indices.size(); ++k) {
            if (s.indices[k] >= *d) fail(line_no, fmt::format("feature index {} >= d={}", s.indices[k], *d));
            if (k && s.indices[k] <= s.indices[k - 1]) fail(line_no, "feature indices must be strictly increasing");
        }
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(dictionary), std::move(samples));
}

void save_model(const ModelFile& file, std::ostream& out) {
    const auto& m = file.model;
    const auto positive_zeros = static_cast<std::size_t>(std::count_if(
        m.weights.begin(), m.weights.end(), [](double w) { return w == 0.0 && !std::signbit(w); }));
    const bool sparse = 2 * positive_zeros > m.weights.size();

    out << kModelMagic << ' ' << kVersion << '\n';
    out << "d=" << m.dimension() << '\n';
    out << "bias=" << format_real(m.bias) << '\n';
    out << "fingerprint=" << fmt::format("{:016x}", m.dictionary_fingerprint) << '\n';
    out << "encoding=" << (sparse ? "sparse" : "dense") << '\n';
    out << "kind=" << file.metadata.kind << '\n';
    for (const auto& [key, value] : file.metadata.config) out << "config." << key << '=' << value << '\n';
    if (file.metadata.bounded) out << "bounded=" << join_indices(*file.metadata.bounded) << '\n';
    for (std::size_t j = 0; j < m.dimension(); ++j) {
        const double w = m.weights[j];
        if (sparse && w == 0.0 && !std::signbit(w)) continue;
        out << "w " << j << ' ' << format_real(w) << '\n';
    }
}

ModelFile load_model(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) fail(line_no, "empty file; expected model header");
    strip_cr(line);
    const auto header = split(line, ' ');
    if (header.size() != 2 || header[0] != kModelMagic) fail(line_no, "not a driftguard model file");
    if (header[1] != kVersion) fail(line_no, fmt::format("unsupported model format version '{}'", header[1]));

    ModelFile file;
    std::optional<std::size_t> d;
    std::optional<double> bias;
    std::optional<std::uint64_t> fingerprint;
    std::optional<bool> sparse;
    std::vector<bool> seen;

    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        if (line.rfind("w ", 0) == 0) {
            if (!d || !bias || !fingerprint || !sparse) fail(line_no, "weight line before the d/bias/fingerprint/encoding keys");
            const auto parts = split(std::string_view(line).substr(2), ' ');
            if (parts.size() != 2) fail(line_no, "expected 'w <idx> <value>'");
            const auto idx = parse_int<std::size_t>(parts[0]);
            if (!idx || *idx >= *d) fail(line_no, fmt::format("weight index '{}' out of range", parts[0]));
            if (seen[*idx]) fail(line_no, fmt::format("weight {} given twice", *idx));
            seen[*idx] = true;
            try {
                file.model.weights[*idx] = parse_real(parts[1]);
            } catch (const DataError& e) {
                fail(line_no, e.what());
            }
            if (!std::isfinite(file.model.weights[*idx])) fail(line_no, "non-finite weight");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string_view value = std::string_view(line).substr(eq + 1);
        try {
            if (key == "d") {
                d = parse_int<std::size_t>(value);
                if (!d) fail(line_no, "bad d");
                file.model.weights.assign(*d, 0.0);
                seen.assign(*d, false);
            } else if (key == "bias") {
                bias = parse_real(value);
                if (!std::isfinite(*bias)) fail(line_no, "non-finite bias");
            } else if (key == "fingerprint") {
                if (value.size() == 16) fingerprint = parse_int<std::uint64_t>(value, 16);
                if (!fingerprint) fail(line_no, "bad fingerprint");
            } else if (key == "encoding") {
                if (value != "dense" && value != "sparse") fail(line_no, "encoding must be dense or sparse");
                sparse = value == "sparse";
            } else if (key == "kind") {
                file.metadata.kind = std::string(value);
            } else if (key.rfind("config.", 0) == 0) {
                file.metadata.config.emplace_back(key.substr(7), std::string(value));
            } else if (key == "bounded") {
                file.metadata.bounded = parse_indices(value, line_no);
            } else {
                fail(line_no, fmt::format("unknown key '{}'", key));
            }
        } catch (const DataError& e) {
            if (std::string_view(e.what()).rfind("line ", 0) == 0) throw;
            fail(line_no, e.what());
        }
    }
    if (!d || !bias || !fingerprint || !sparse) fail(line_no, "model file is missing one of d, bias, fingerprint, encoding");
    if (!*sparse)
        for (std::size_t j = 0; j < *d; ++j)
            if (!seen[j]) fail(line_no, fmt::format("dense model lacks weight {}", j));
    if (file.metadata.bounded)
        for (FeatureIndex j : *file.metadata.bounded)
            if (j >= *d) fail(line_no, fmt::format("bounded index {} >= d", j));
    file.model.bias = *bias;
    file.model.dictionary_fingerprint = *fingerprint;
    return file;
}

ModelFile load_model(std::istream& in, const FeatureDictionary& dictionary) {
    ModelFile file = load_model(in);
    require_compatible(file.model, dictionary);
    return file;
}

void save_drift_report(const DriftReport& report, const Provenance& provenance, std::ostream& out) {
    write_provenance(out, "driftguard drift report (sorted by delta ascending)", provenance);
    const auto unobserved =
        std::count_if(report.records.begin(), report.records.end(), [](const DriftRecord& r) { return !r.observed; });
    out << "# unobserved_features=" << unobserved << '\n';
    out << "rank,feature_index,feature_name,weight,slope,delta\n";
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& r = report.records[i];
        out << i + 1 << ',' << r.index << ',' << csv_field(r.name) << ',' << format_real(r.weight) << ','
            << format_real(r.slope) << ',' << format_real(r.delta) << '\n';
    }
}

void save_eval_report(std::span<const SlotMetrics> metrics, const Provenance& provenance, std::ostream& out) {
    write_provenance(out, "driftguard evaluation report (pauc = partial AUC up to fpr_cap, divided by fpr_cap)",
                     provenance);
    out << "slot_id,slot_start,slot_end,n_pos,n_neg,tp,fp,fn,tn,precision,recall,pauc\n";
    for (const auto& m : metrics)
        out << m.slot << ',' << m.bounds.start << ',' << m.bounds.end << ',' << m.n_pos << ',' << m.n_neg << ','
            << m.true_pos << ',' << m.false_pos << ',' << m.false_neg << ',' << m.true_neg << ','
            << optional_real(m.precision) << ',' << optional_real(m.recall) << ',' << optional_real(m.pauc) << '\n';
}

void save_score_trend(std::span<const TrendPoint> trend, const Provenance& provenance, std::ostream& out) {
    write_provenance(out, "driftguard score trend (population std)", provenance);
    out << "slot_id,slot_start,slot_end,count,mean,std,min,max\n";
    for (const auto& p : trend) {
        out << p.slot << ',' << p.bounds.start << ',' << p.bounds.end << ',' << p.count;
        if (p.stats)
            out << ',' << format_real(p.stats->mean) << ',' << format_real(p.stats->stddev) << ','
                << format_real(p.stats->min) << ',' << format_real(p.stats->max) << '\n';
        else
            out << ",null,null,null,null\n";
    }
}

std::string ground_truth_json(const GroundTruth& truth) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& p : truth.planted)
        j[std::to_string(p.index)] = {{"group", p.group == DriftGroup::up ? "up" : "down"},
                                      {"planted_slope_sign", p.slope_sign}};
    return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(fmt::format("cannot open '{}' for writing", tmp.string()));
        try {
            writer(out);
        } catch (...) {
            out.close();
            std::filesystem::remove(tmp);
            throw;
        }
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw DataError(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError(fmt::format("cannot move output into '{}': {}", path.string(), ec.message()));
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read dataset '{}'", path.string()));
    try {
        return load_dataset(in);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read model '{}'", path.string()));
    try {
        return load_model(in);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace driftguard::io
