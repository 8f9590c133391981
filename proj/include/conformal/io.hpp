#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conformal/calibration.hpp"
#include "conformal/harness.hpp"
#include "conformal/sets.hpp"
#include "conformal/uncertainty.hpp"

namespace conformal {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Errors carry a machine-readable code plus a locus (row/line) where known.

struct IoError : std::runtime_error {
    std::string code;
    long locus;  // -1 when not applicable

    IoError(std::string code_, const std::string& message, long locus_ = -1)
        : std::runtime_error(message), code(std::move(code_)), locus(locus_) {}

    json to_json() const {
        json j{{"code", code}, {"message", what()}};
        if (locus >= 0) j["locus"] = locus;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Numeric formatting: up to 17 significant digits, lossless round-trips.

inline std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

/// Write-temp-then-rename so a crashed run never leaves a partial artifact.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("io.open", "cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw IoError("io.write", "failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io.open", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Dataset ingestion

enum class DatasetFormat { Csv, Jsonl };

inline DatasetFormat dataset_format_from_string(const std::string& s) {
    if (s == "csv") return DatasetFormat::Csv;
    if (s == "jsonl") return DatasetFormat::Jsonl;
    throw IoError("format.unknown", "unknown dataset format: " + s);
}

namespace detail {

inline double parse_double(const std::string& token, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw IoError("parse.number", "line " + std::to_string(line) + ": bad number '" + token +
                                          "'", line);
    }
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace detail

/// CSV: header `p0,p1,...,p{K-1},label`, one example per row.
/// JSONL: one {"probs":[...], "label": int} object per line.
inline LabeledProbabilityDataset load_dataset(const std::filesystem::path& path,
                                              DatasetFormat format, bool renormalize = false) {
    std::ifstream in(path);
    if (!in) throw IoError("io.open", "cannot open " + path.string());

    LabeledProbabilityDataset data;
    std::string line;
    long line_no = 0;

    if (format == DatasetFormat::Csv) {
        if (!std::getline(in, line)) throw IoError("parse.header", "empty CSV file", 0);
        line_no = 1;
        const auto header = detail::split_csv(line);
        if (header.size() < 3 || header.back() != "label") {
            throw IoError("parse.header", "expected header p0,...,p{K-1},label", 1);
        }
        for (std::size_t i = 0; i + 1 < header.size(); ++i) {
            if (header[i] != "p" + std::to_string(i)) {
                throw IoError("parse.header", "bad probability column '" + header[i] + "'", 1);
            }
        }
        data.num_classes = static_cast<int>(header.size()) - 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto fields = detail::split_csv(line);
            if (static_cast<int>(fields.size()) != data.num_classes + 1) {
                throw IoError("parse.row",
                              "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(data.num_classes + 1) + " fields, got " +
                                  std::to_string(fields.size()),
                              line_no);
            }
            LabeledRow row;
            for (int k = 0; k < data.num_classes; ++k) {
                row.probs.push_back(detail::parse_double(fields[k], line_no));
            }
            row.label = static_cast<int>(detail::parse_double(fields.back(), line_no));
            data.rows.push_back(std::move(row));
        }
    } else {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw IoError("parse.json", "line " + std::to_string(line_no) + ": " + e.what(),
                              line_no);
            }
            if (!j.contains("probs") || !j.contains("label")) {
                throw IoError("schema.row",
                              "line " + std::to_string(line_no) + ": need probs and label",
                              line_no);
            }
            LabeledRow row;
            row.probs = j.at("probs").get<std::vector<double>>();
            row.label = j.at("label").get<int>();
            if (data.num_classes == 0) data.num_classes = static_cast<int>(row.probs.size());
            data.rows.push_back(std::move(row));
        }
    }

    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        auto& row = data.rows[i];
        if (static_cast<int>(row.probs.size()) != data.num_classes) {
            throw IoError("schema.k", "row " + std::to_string(i) + ": inconsistent class count",
                          static_cast<long>(i));
        }
        if (renormalize) renormalize_probability_vector(row.probs);
        try {
            validate_probability_vector(row.probs);
        } catch (const std::domain_error& e) {
            throw IoError("validate.row", "row " + std::to_string(i) + ": " + e.what(),
                          static_cast<long>(i));
        }
        if (row.label < 0 || row.label >= data.num_classes) {
            throw IoError("validate.label", "row " + std::to_string(i) + ": label out of range",
                          static_cast<long>(i));
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// CalibrationResult <-> JSON. The +infinity q_hat serializes as "inf".

inline json to_json(const CalibrationResult& calib) {
    json j;
    j["q_hat"] = calib.is_sentinel() ? json("inf") : json(calib.q_hat);
    j["n"] = calib.n;
    j["delta"] = calib.delta;
    j["K"] = calib.num_classes;
    j["score"] = {{"kind", to_string(calib.score_config.kind)},
                  {"lambda", calib.score_config.lambda},
                  {"k_reg", calib.score_config.k_reg},
                  {"randomized", calib.score_config.randomized},
                  {"seed", calib.score_config.seed}};
    return j;
}

inline CalibrationResult calibration_from_json(const json& j) {
    CalibrationResult calib;
    if (j.at("q_hat").is_string()) {
        if (j.at("q_hat").get<std::string>() != "inf") {
            throw IoError("schema.calib", "q_hat string must be \"inf\"");
        }
        calib.q_hat = std::numeric_limits<double>::infinity();
    } else {
        calib.q_hat = j.at("q_hat").get<double>();
    }
    calib.n = j.at("n").get<int>();
    calib.delta = j.at("delta").get<double>();
    calib.num_classes = j.at("K").get<int>();
    const auto& s = j.at("score");
    calib.score_config.kind = score_kind_from_string(s.at("kind").get<std::string>());
    calib.score_config.lambda = s.at("lambda").get<double>();
    calib.score_config.k_reg = s.at("k_reg").get<int>();
    calib.score_config.randomized = s.at("randomized").get<bool>();
    calib.score_config.seed = s.at("seed").get<std::uint64_t>();
    return calib;
}

// ---------------------------------------------------------------------------
// Prediction sets as JSON lines: {row, labels, m, K, covered}

inline std::string prediction_sets_to_jsonl(const std::vector<PredictionOutcome>& outcomes) {
    std::string out;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        json j{{"row", i},
               {"labels", outcomes[i].set.labels},
               {"m", outcomes[i].set.m},
               {"K", outcomes[i].set.num_classes},
               {"covered", outcomes[i].covered}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::vector<PredictionOutcome> prediction_sets_from_jsonl(const std::string& text) {
    std::vector<PredictionOutcome> outcomes;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("parse.json", "line " + std::to_string(line_no) + ": " + e.what(),
                          line_no);
        }
        PredictionOutcome o;
        o.set.labels = j.at("labels").get<std::vector<int>>();
        o.set.m = j.at("m").get<int>();
        o.set.num_classes = j.at("K").get<int>();
        o.covered = j.at("covered").get<bool>();
        if (o.set.m != static_cast<int>(o.set.labels.size())) {
            throw IoError("schema.set", "line " + std::to_string(line_no) + ": m != |labels|",
                          line_no);
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Uncertainty quantifications as JSON lines mirroring the struct fields.

inline json to_json(const UncertaintyQuantification& q) {
    return json{{"u_pure", q.u_pure},
                {"lower", q.lower},
                {"upper", q.upper},
                {"variation", q.variation},
                {"m", q.m},
                {"K", q.num_classes},
                {"n", q.n},
                {"delta", q.delta},
                {"lower_clamped", q.lower_clamped},
                {"upper_clamped", q.upper_clamped},
                {"degenerate_empty", q.degenerate_empty}};
}

inline UncertaintyQuantification quantification_from_json(const json& j) {
    UncertaintyQuantification q;
    q.u_pure = j.at("u_pure").get<double>();
    q.lower = j.at("lower").get<double>();
    q.upper = j.at("upper").get<double>();
    q.variation = j.at("variation").get<double>();
    q.m = j.at("m").get<int>();
    q.num_classes = j.at("K").get<int>();
    q.n = j.at("n").get<int>();
    q.delta = j.at("delta").get<double>();
    q.lower_clamped = j.at("lower_clamped").get<bool>();
    q.upper_clamped = j.at("upper_clamped").get<bool>();
    q.degenerate_empty = j.at("degenerate_empty").get<bool>();
    return q;
}

inline std::string quantifications_to_jsonl(const std::vector<UncertaintyQuantification>& qs) {
    std::string out;
    for (const auto& q : qs) {
        out += to_json(q).dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Harness report / config

inline json to_json(const HarnessReport& report) {
    json hist = json::object();
    for (const auto& [m, count] : report.size_histogram) hist[std::to_string(m)] = count;
    json strat = json::object();
    for (const auto& [m, cov] : report.size_stratified_coverage) strat[std::to_string(m)] = cov;
    return json{{"mean_coverage", report.mean_coverage},
                {"coverage_per_trial", report.coverage_per_trial},
                {"mean_set_size", report.mean_set_size},
                {"size_histogram", hist},
                {"size_stratified_coverage", strat},
                {"theorem1_lower", report.theorem1_lower},
                {"theorem1_upper", report.theorem1_upper},
                {"mc_tolerance", report.mc_tolerance},
                {"pass", report.pass}};
}

inline std::string per_trial_csv(const HarnessReport& report) {
    std::string out = "trial,coverage\n";
    for (std::size_t t = 0; t < report.coverage_per_trial.size(); ++t) {
        out += std::to_string(t) + "," + format_double(report.coverage_per_trial[t]) + "\n";
    }
    return out;
}

inline SynthConfig synth_config_from_json(const json& j) {
    SynthConfig cfg;
    cfg.num_classes = j.at("K").get<int>();
    cfg.n_cal = j.at("n_cal").get<int>();
    cfg.n_val = j.at("n_val").get<int>();
    cfg.trials = j.at("trials").get<int>();
    cfg.dirichlet_alpha = j.value("dirichlet_alpha", 1.0);
    cfg.temperature = j.value("temperature", 1.0);
    cfg.delta = j.at("delta").get<double>();
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("score")) {
        const auto& s = j.at("score");
        cfg.score_config.kind = score_kind_from_string(s.value("kind", std::string("lac")));
        cfg.score_config.lambda = s.value("lambda", 0.0);
        cfg.score_config.k_reg = s.value("k_reg", 0);
        cfg.score_config.randomized = s.value("randomized", false);
        cfg.score_config.seed = s.value("seed", std::uint64_t{0});
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Figure-data emission (bound curves over delta or n grids)

enum class FigureKind { UncertaintyVsDelta, VariationVsN };

struct FigureSpec {
    FigureKind figure = FigureKind::UncertaintyVsDelta;
    int num_classes = 10;
    std::vector<int> m_values;
    std::vector<double> delta_grid;  // uncertainty_vs_delta
    std::vector<long> n_grid;        // variation_vs_n
    int fixed_n = 1000;              // uncertainty_vs_delta
    double fixed_delta = 0.1;        // variation_vs_n

    void validate() const {
        if (num_classes < 2) throw IoError("spec.figure", "K must be >= 2");
        if (m_values.empty()) throw IoError("spec.figure", "m_values must be nonempty");
        for (int m : m_values) {
            if (m < 0 || m > num_classes) throw IoError("spec.figure", "m out of [0,K]");
        }
        const bool vs_delta = figure == FigureKind::UncertaintyVsDelta;
        const auto grid_ok = [](const auto& g) {
            return !g.empty() && std::is_sorted(g.begin(), g.end());
        };
        if (vs_delta && !grid_ok(delta_grid)) {
            throw IoError("spec.figure", "delta_grid must be nonempty and sorted ascending");
        }
        if (!vs_delta && !grid_ok(n_grid)) {
            throw IoError("spec.figure", "n_grid must be nonempty and sorted ascending");
        }
    }
};

inline FigureSpec figure_spec_from_json(const json& j) {
    FigureSpec spec;
    const auto kind = j.at("figure").get<std::string>();
    if (kind == "uncertainty_vs_delta") {
        spec.figure = FigureKind::UncertaintyVsDelta;
    } else if (kind == "variation_vs_n") {
        spec.figure = FigureKind::VariationVsN;
    } else {
        throw IoError("spec.figure", "unknown figure kind: " + kind);
    }
    spec.num_classes = j.at("K").get<int>();
    spec.m_values = j.at("m_values").get<std::vector<int>>();
    if (spec.figure == FigureKind::UncertaintyVsDelta) {
        spec.delta_grid = j.at("delta_grid").get<std::vector<double>>();
        spec.fixed_n = j.at("n").get<int>();
    } else {
        spec.n_grid = j.at("n_grid").get<std::vector<long>>();
        spec.fixed_delta = j.at("delta").get<double>();
    }
    spec.validate();
    return spec;
}

/// uncertainty_vs_delta: delta,m,u_pure,lower,upper per (delta x m) at fixed n.
/// variation_vs_n: n,m,variation per (n x m) at fixed delta.
inline std::string emit_figure_data(const FigureSpec& spec) {
    spec.validate();
    std::string out;
    if (spec.figure == FigureKind::UncertaintyVsDelta) {
        out = "delta,m,u_pure,lower,upper\n";
        for (double delta : spec.delta_grid) {
            for (int m : spec.m_values) {
                const auto q = quantify(m, delta, spec.num_classes, spec.fixed_n);
                out += format_double(delta) + "," + std::to_string(m) + "," +
                       format_double(q.u_pure) + "," + format_double(q.lower) + "," +
                       format_double(q.upper) + "\n";
            }
        }
    } else {
        out = "n,m,variation\n";
        for (long n : spec.n_grid) {
            for (int m : spec.m_values) {
                const auto q =
                    quantify(m, spec.fixed_delta, spec.num_classes, static_cast<int>(n));
                out += std::to_string(n) + "," + std::to_string(m) + "," +
                       format_double(q.variation) + "\n";
            }
        }
    }
    return out;
}

}  // namespace conformal
