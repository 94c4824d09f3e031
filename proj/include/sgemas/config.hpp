#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgemas/engine.hpp"
#include "sgemas/errors.hpp"
#include "sgemas/signal_io.hpp"

namespace sgemas {

// ---------------------------------------------------------------------------
// Flat, typed, sectioned text config:
//
//   # full-line or trailing comment ('#' or ';')
//   [section]            sections may be dotted, e.g. [input.synthetic]
//   key = value          keys may repeat where documented (segment)
//
// Unknown sections or keys are errors: every run must be reproducible from
// the config alone, so silent typos are not tolerated.
// ---------------------------------------------------------------------------
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    static ConfigFile parse_string(const std::string& text, const std::string& name = "<config>") {
        ConfigFile cfg;
        cfg.name_ = name;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw ConfigError(where(name, line_no) + "unterminated section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                if (section.empty())
                    throw ConfigError(where(name, line_no) + "empty section name");
                continue;
            }
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(where(name, line_no) + "expected 'key = value', got '" +
                                  trimmed + "'");
            Entry e;
            e.section = section;
            e.key = trim(trimmed.substr(0, eq));
            e.value = trim(trimmed.substr(eq + 1));
            e.line = line_no;
            if (e.key.empty()) throw ConfigError(where(name, line_no) + "empty key");
            cfg.entries_.push_back(std::move(e));
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        for (const Entry& e : entries_)
            if (e.section == section && e.key == key) return true;
        return false;
    }

    // Scalar getters; the last occurrence wins for non-repeatable keys.
    std::string get_string(const std::string& section, const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) const {
        const Entry* found = nullptr;
        for (const Entry& e : entries_)
            if (e.section == section && e.key == key) {
                found = &e;
                e.used = true;
            }
        if (found) return found->value;
        if (fallback) return *fallback;
        throw ConfigError(name_ + ": missing required key [" + section + "] " + key);
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(section, key, get_string(section, key));
    }
    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return get_double(section, key);
    }

    std::int64_t get_int(const std::string& section, const std::string& key) const {
        return parse_int(section, key, get_string(section, key));
    }
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const {
        if (!has(section, key)) return fallback;
        return get_int(section, key);
    }

    std::uint64_t get_uint(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        const std::string s = get_string(section, key);
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ConfigError(bad_value(section, key, s, "unsigned integer"));
        return v;
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string s = get_string(section, key);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        throw ConfigError(bad_value(section, key, s, "boolean"));
    }

    // All values of a repeatable key, in file order.
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        for (const Entry& e : entries_)
            if (e.section == section && e.key == key) {
                out.push_back(e.value);
                e.used = true;
            }
        return out;
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  std::vector<int> fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<int> out;
        for (const std::string& tok : split_csv(get_string(section, key)))
            out.push_back(static_cast<int>(parse_int(section, key, tok)));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                             std::vector<std::string> fallback) const {
        if (!has(section, key)) return fallback;
        return split_csv(get_string(section, key));
    }

    // Fails on any entry no getter consumed; catches typos and stale keys.
    void reject_unknown_keys() const {
        for (const Entry& e : entries_)
            if (!e.used)
                throw ConfigError(where(name_, e.line) + "unknown key [" + e.section + "] " +
                                  e.key);
    }

    static std::vector<std::string> split_csv(const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            std::size_t pos = s.find(',', start);
            if (pos == std::string::npos) pos = s.size();
            const std::string tok = trim(s.substr(start, pos - start));
            if (!tok.empty()) out.push_back(tok);
            start = pos + 1;
        }
        return out;
    }

private:
    struct Entry {
        std::string section, key, value;
        int line = 0;
        mutable bool used = false;
    };

    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    static std::string where(const std::string& name, int line) {
        return name + ":" + std::to_string(line) + ": ";
    }

    std::string bad_value(const std::string& section, const std::string& key,
                          const std::string& value, const char* kind) const {
        return name_ + ": [" + section + "] " + key + ": cannot parse '" + value + "' as " + kind;
    }

    double parse_double(const std::string& section, const std::string& key,
                        const std::string& s) const {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ConfigError(bad_value(section, key, s, "number"));
        return v;
    }

    std::int64_t parse_int(const std::string& section, const std::string& key,
                           const std::string& s) const {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ConfigError(bad_value(section, key, s, "integer"));
        return v;
    }

    std::string name_;
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// RunConfig: the full declarative description of one command invocation.
// ---------------------------------------------------------------------------

struct CsvInput {
    std::string path;
    CsvSchema schema;
    std::int64_t window_len = 3600;  // rolling z-score window (per-sample mode)
    std::optional<std::int64_t> beat_len;

    void validate() const {
        if (path.empty()) throw ConfigError("input.csv.path must be set");
        if (window_len < 1) throw ConfigError("input.csv.window_len must be >= 1");
        if (beat_len && *beat_len < 2) throw ConfigError("input.csv.beat_len must be >= 2");
        if (schema.value_column < 0) throw ConfigError("input.csv.value_column must be >= 0");
        if (schema.label_column && *schema.label_column < 0)
            throw ConfigError("input.csv.label_column must be >= 0");
    }
};

struct InputConfig {
    std::optional<SyntheticSpec> synthetic;
    std::optional<CsvInput> csv;

    void validate() const {
        if (synthetic.has_value() == csv.has_value())
            throw ConfigError("input.kind must select exactly one source (synthetic or csv)");
        if (synthetic) synthetic->validate();
        if (csv) csv->validate();
    }
};

struct EvalConfig {
    enum class Mode { PerSample, PerBeat };
    Mode mode = Mode::PerSample;
    std::vector<Variant> variants{Variant::V3_0, Variant::V3_1, Variant::V3_2, Variant::V3_3};
    std::optional<double> baseline_gamma;
    int num_streams = 2;

    void validate() const {
        if (baseline_gamma && (*baseline_gamma < 0.0 || *baseline_gamma >= 1.0))
            throw ConfigError("eval.baseline_gamma must be in [0,1)");
        if (num_streams < 1) throw ConfigError("eval.num_streams must be >= 1");
        if (variants.empty()) throw ConfigError("eval.variants must be non-empty");
    }
};

struct OutputConfig {
    std::string dir = "out";
    std::string trace_csv = "trace.csv";
    std::string phase_csv = "phase.csv";
    std::string scored_csv = "scored.csv";
    std::string report_json = "report.json";
    std::string report_csv = "report.csv";
    std::string roc_csv = "roc.csv";

    std::string path(const std::string& name) const {
        return (std::filesystem::path(dir) / name).string();
    }
};

struct RunConfig {
    EngineParams engine;
    InputConfig input;
    EvalConfig eval;
    OutputConfig output;

    void validate() const {
        engine.validate();
        input.validate();
        eval.validate();
        if (output.dir.empty()) throw ConfigError("output.dir must be non-empty");
    }
};

namespace detail {

inline Segment parse_segment(const std::string& value) {
    std::istringstream in(value);
    std::string kind;
    Segment seg;
    if (!(in >> kind >> seg.start >> seg.len >> seg.intensity))
        throw ConfigError("segment must be '<kind> <start> <len> <intensity>', got '" + value +
                          "'");
    std::string extra;
    if (in >> extra) throw ConfigError("segment has trailing tokens: '" + value + "'");
    seg.kind = segment_kind_from_string(kind);
    return seg;
}

}  // namespace detail

inline RunConfig load_run_config(const ConfigFile& cfg) {
    RunConfig rc;

    // [engine]
    rc.engine.gamma = cfg.get_double("engine", "gamma", rc.engine.gamma);
    rc.engine.alpha = cfg.get_double("engine", "alpha", rc.engine.alpha);
    rc.engine.beta = cfg.get_double("engine", "beta", rc.engine.beta);
    rc.engine.alpha_instab = cfg.get_double("engine", "alpha_instab", rc.engine.alpha_instab);
    rc.engine.diffusion_d = cfg.get_double("engine", "diffusion_d", rc.engine.diffusion_d);
    rc.engine.e_init = cfg.get_double("engine", "e_init", rc.engine.e_init);
    rc.engine.precision.eps = cfg.get_double("engine", "precision_eps", rc.engine.precision.eps);
    rc.engine.precision.decay =
        cfg.get_double("engine", "precision_decay", rc.engine.precision.decay);
    rc.engine.instability_scales =
        cfg.get_int_list("engine", "instability_scales", rc.engine.instability_scales);
    rc.engine.entropy.window =
        static_cast<int>(cfg.get_int("engine", "entropy_window", rc.engine.entropy.window));
    rc.engine.entropy.bins =
        static_cast<int>(cfg.get_int("engine", "entropy_bins", rc.engine.entropy.bins));
    if (cfg.has("engine", "variant"))
        rc.engine.variant = variant_from_string(cfg.get_string("engine", "variant"));
    rc.engine.seed = cfg.get_uint("engine", "seed", rc.engine.seed);

    // [plasticity]
    PlasticityParams& pl = rc.engine.plasticity;
    pl.e_thresh = cfg.get_double("plasticity", "e_thresh", pl.e_thresh);
    pl.e_crit = cfg.get_double("plasticity", "e_crit", pl.e_crit);
    pl.eta_learning = cfg.get_double("plasticity", "eta_learning", pl.eta_learning);
    pl.omega = cfg.get_double("plasticity", "omega", pl.omega);
    pl.tau_grad = cfg.get_double("plasticity", "tau_grad", pl.tau_grad);
    pl.tau_flat = cfg.get_double("plasticity", "tau_flat", pl.tau_flat);
    pl.n_max = static_cast<int>(cfg.get_int("plasticity", "n_max", pl.n_max));
    if (cfg.has("plasticity", "mode")) {
        const std::string mode = cfg.get_string("plasticity", "mode");
        if (mode == "deterministic")
            pl.mode = PlasticityMode::Deterministic;
        else if (mode == "stochastic")
            pl.mode = PlasticityMode::Stochastic;
        else
            throw ConfigError("plasticity.mode must be deterministic or stochastic, got '" +
                              mode + "'");
    }
    pl.spawn.sensor_sigma = cfg.get_double("plasticity", "sensor_sigma", pl.spawn.sensor_sigma);
    pl.spawn.regulator_kp = cfg.get_double("plasticity", "regulator_kp", pl.spawn.regulator_kp);
    pl.spawn.regulator_kd = cfg.get_double("plasticity", "regulator_kd", pl.spawn.regulator_kd);
    pl.spawn.catalyst_lambda =
        cfg.get_double("plasticity", "catalyst_lambda", pl.spawn.catalyst_lambda);

    // [input] + [input.synthetic] / [input.csv]
    const std::string kind = cfg.get_string("input", "kind");
    if (kind == "synthetic") {
        SyntheticSpec spec;
        spec.total_len = cfg.get_int("input.synthetic", "total_len");
        spec.baseline_amplitude =
            cfg.get_double("input.synthetic", "baseline_amplitude", spec.baseline_amplitude);
        spec.baseline_frequency =
            cfg.get_double("input.synthetic", "baseline_frequency", spec.baseline_frequency);
        spec.noise_sigma = cfg.get_double("input.synthetic", "noise_sigma", spec.noise_sigma);
        spec.seed = cfg.get_uint("input.synthetic", "seed", spec.seed);
        for (const std::string& s : cfg.get_all("input.synthetic", "segment"))
            spec.segments.push_back(detail::parse_segment(s));
        rc.input.synthetic = std::move(spec);
    } else if (kind == "csv") {
        CsvInput in;
        in.path = cfg.get_string("input.csv", "path");
        in.schema.value_column =
            static_cast<int>(cfg.get_int("input.csv", "value_column", in.schema.value_column));
        if (cfg.has("input.csv", "label_column"))
            in.schema.label_column = static_cast<int>(cfg.get_int("input.csv", "label_column"));
        const std::string delim = cfg.get_string("input.csv", "delimiter", std::string(","));
        if (delim.size() != 1)
            throw ConfigError("input.csv.delimiter must be a single character");
        in.schema.delimiter = delim[0];
        in.schema.has_header = cfg.get_bool("input.csv", "has_header", in.schema.has_header);
        in.window_len = cfg.get_int("input.csv", "window_len", in.window_len);
        if (cfg.has("input.csv", "beat_len")) in.beat_len = cfg.get_int("input.csv", "beat_len");
        rc.input.csv = std::move(in);
    } else {
        throw ConfigError("input.kind must be synthetic or csv, got '" + kind + "'");
    }

    // [eval]
    if (cfg.has("eval", "mode")) {
        const std::string mode = cfg.get_string("eval", "mode");
        if (mode == "per-sample")
            rc.eval.mode = EvalConfig::Mode::PerSample;
        else if (mode == "per-beat")
            rc.eval.mode = EvalConfig::Mode::PerBeat;
        else
            throw ConfigError("eval.mode must be per-sample or per-beat, got '" + mode + "'");
    }
    if (cfg.has("eval", "variants")) {
        rc.eval.variants.clear();
        for (const std::string& v : cfg.get_string_list("eval", "variants", {}))
            rc.eval.variants.push_back(variant_from_string(v));
    }
    if (cfg.has("eval", "baseline_gamma"))
        rc.eval.baseline_gamma = cfg.get_double("eval", "baseline_gamma");
    rc.eval.num_streams =
        static_cast<int>(cfg.get_int("eval", "num_streams", rc.eval.num_streams));

    // [output]
    rc.output.dir = cfg.get_string("output", "dir", rc.output.dir);
    rc.output.trace_csv = cfg.get_string("output", "trace_csv", rc.output.trace_csv);
    rc.output.phase_csv = cfg.get_string("output", "phase_csv", rc.output.phase_csv);
    rc.output.scored_csv = cfg.get_string("output", "scored_csv", rc.output.scored_csv);
    rc.output.report_json = cfg.get_string("output", "report_json", rc.output.report_json);
    rc.output.report_csv = cfg.get_string("output", "report_csv", rc.output.report_csv);
    rc.output.roc_csv = cfg.get_string("output", "roc_csv", rc.output.roc_csv);

    cfg.reject_unknown_keys();
    rc.validate();
    return rc;
}

// Uniform seed override (--seed): replaces both the engine seed and the
// synthetic generator seed.
inline void override_seed(RunConfig& rc, std::uint64_t seed) {
    rc.engine.seed = seed;
    if (rc.input.synthetic) rc.input.synthetic->seed = seed;
}

// Output rebase (--out): all artifacts go under the given directory.
inline void override_out_dir(RunConfig& rc, const std::string& dir) { rc.output.dir = dir; }

}  // namespace sgemas
