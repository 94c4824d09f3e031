#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgemas/config.hpp"
#include "sgemas/engine.hpp"
#include "sgemas/errors.hpp"
#include "sgemas/eval.hpp"
#include "sgemas/metrics.hpp"
#include "sgemas/signal_io.hpp"
#include "sgemas/trace_io.hpp"

namespace sgemas {

namespace detail {

inline void ensure_out_dir(const OutputConfig& out) {
    std::error_code ec;
    std::filesystem::create_directories(out.dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out.dir + "': " + ec.message());
}

// Loads the configured input as a continuous labeled/unlabeled stream. CSV
// input is passed through the rolling z-score; synthetic input is consumed as
// generated (already in normalized units).
inline std::vector<SignalFrame> load_stream(const RunConfig& rc) {
    if (rc.input.synthetic) return generate_synthetic(*rc.input.synthetic);
    const CsvInput& csv = *rc.input.csv;
    auto stream = load_csv_series(csv.path, csv.schema);
    return rolling_zscore(stream, csv.window_len);
}

inline void write_roc_csv(const std::string& path, const std::vector<RocPoint>& points) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "fpr,tpr,threshold\n";
    for (const RocPoint& p : points)
        out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
            << format_double(p.threshold) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline nlohmann::json report_to_json(const AblationReport& r) {
    nlohmann::json j;
    j["kind"] = "ablation";
    j["mode"] = r.mode;
    j["base_seed"] = r.base_seed;
    j["n_streams"] = r.n_streams;
    j["variants"] = r.variants;
    nlohmann::json cells = nlohmann::json::array();
    for (const AblationCell& c : r.cells) {
        nlohmann::json jc;
        jc["variant"] = c.variant;
        jc["stream_id"] = c.stream_id;
        if (c.error.empty()) {
            jc["auc"] = c.auc;
            jc["n_pos"] = c.n_pos;
            jc["n_neg"] = c.n_neg;
        } else {
            jc["error"] = c.error;
        }
        cells.push_back(jc);
    }
    j["cells"] = cells;
    for (const VariantSummary& s : r.summaries) {
        j["summary"][s.variant] = {
            {"mean_auc", s.mean_auc}, {"std_auc", s.std_auc}, {"n_streams", s.n_streams}};
    }
    for (const PairedTest& t : r.paired_tests) {
        nlohmann::json jt;
        if (t.degenerate) {
            jt["degenerate"] = true;
            jt["note"] = t.note;
        } else {
            jt["statistic"] = t.statistic;
            jt["p_two_sided"] = t.p_two_sided;
            jt["exact"] = t.exact;
        }
        j["paired_vs_" + r.variants.front()][t.variant] = jt;
    }
    return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_ablation_csv(const std::string& path, const AblationReport& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "variant,stream_id,auc,n_pos,n_neg\n";
    for (const AblationCell& c : r.cells) {
        out << c.variant << ',' << c.stream_id << ',';
        if (c.error.empty())
            out << format_double(c.auc) << ',' << c.n_pos << ',' << c.n_neg;
        else
            out << ",,";
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

// Scores the configured input into evaluation units. Per-sample mode scores
// every frame by -E_t; per-beat mode segments the raw CSV stream and scores
// each beat with a fresh engine.
inline std::vector<ScoredUnit> score_units(const RunConfig& rc) {
    std::vector<ScoredUnit> units;
    if (rc.eval.mode == EvalConfig::Mode::PerBeat) {
        if (!rc.input.csv || !rc.input.csv->beat_len)
            throw ConfigError("per-beat evaluation requires input.csv with beat_len");
        auto stream = load_csv_series(rc.input.csv->path, rc.input.csv->schema);
        const auto beats = segment_beats(stream, *rc.input.csv->beat_len);
        if (beats.empty())
            std::cerr << "warning: stream shorter than beat_len, no beats produced\n";
        for (std::size_t i = 0; i < beats.size(); ++i)
            units.push_back(ScoredUnit{static_cast<std::int64_t>(i),
                                       score_beat(rc.engine, beats[i]), beats[i].label});
    } else {
        const auto stream = load_stream(rc);
        const auto trace = run_stream(rc.engine, stream);
        for (const TraceRecord& r : trace) units.push_back(ScoredUnit{r.step, r.score, r.label});
    }
    return units;
}

inline std::vector<ScoredItem> labeled_items(const std::vector<ScoredUnit>& units) {
    std::vector<ScoredItem> items;
    for (const ScoredUnit& u : units)
        if (u.label) items.push_back(ScoredItem{u.score, *u.label});
    if (items.size() != units.size() || items.empty())
        throw MetricError("evaluation requires labels on every unit; input is (partly) unlabeled");
    return items;
}

}  // namespace detail

// simulate: run the engine over a synthetic stream, write the full trace and
// the phase-space projection, print a one-line summary.
inline void cmd_simulate(const RunConfig& rc, std::ostream& out = std::cout) {
    if (!rc.input.synthetic) throw ConfigError("simulate requires input.kind = synthetic");
    detail::ensure_out_dir(rc.output);

    const auto stream = generate_synthetic(*rc.input.synthetic);
    Engine engine(rc.engine);
    std::vector<TraceRecord> trace;
    trace.reserve(stream.size());
    for (const SignalFrame& f : stream) trace.push_back(engine.step(f));

    write_trace_csv(rc.output.path(rc.output.trace_csv), trace);
    write_phase_csv(rc.output.path(rc.output.phase_csv), trace);

    const FlopSummary flops = flop_estimate(trace);
    out << "simulate: steps=" << trace.size() << " peak_n=" << engine.state().pop.peak_count
        << " final_e=" << format_double(engine.state().energy)
        << " flops_total=" << flops.flops_total << " trace=" << rc.output.path(rc.output.trace_csv)
        << '\n';
}

// detect: score a CSV stream per sample or per beat; labels pass through.
inline void cmd_detect(const RunConfig& rc, std::ostream& out = std::cout) {
    if (!rc.input.csv) throw ConfigError("detect requires input.kind = csv");
    detail::ensure_out_dir(rc.output);

    RunConfig effective = rc;
    if (rc.input.csv->beat_len) effective.eval.mode = EvalConfig::Mode::PerBeat;
    const auto units = detail::score_units(effective);
    write_scored_csv(rc.output.path(rc.output.scored_csv), units);

    out << "detect: units=" << units.size() << " mode="
        << (effective.eval.mode == EvalConfig::Mode::PerBeat ? "per-beat" : "per-sample")
        << " scored=" << rc.output.path(rc.output.scored_csv) << '\n';
}

// evaluate: compute ROC/AUC of the engine on the labeled input, optionally
// against the naive leaky-integrator baseline, and write report + ROC points.
inline void cmd_evaluate(const RunConfig& rc, std::ostream& out = std::cout) {
    detail::ensure_out_dir(rc.output);

    const auto units = detail::score_units(rc);
    const auto items = detail::labeled_items(units);
    const double engine_auc = roc_auc(items);
    const auto points = roc_points(items);

    std::int64_t n_pos = 0;
    for (const ScoredItem& it : items) n_pos += it.label ? 1 : 0;

    nlohmann::json j;
    j["kind"] = "evaluate";
    j["mode"] = rc.eval.mode == EvalConfig::Mode::PerBeat ? "per-beat" : "per-sample";
    j["engine"] = {{"auc", engine_auc},
                   {"variant", to_string(rc.engine.variant)},
                   {"n_pos", n_pos},
                   {"n_neg", static_cast<std::int64_t>(items.size()) - n_pos}};

    std::optional<double> baseline_auc;
    if (rc.eval.baseline_gamma) {
        // The baseline sees the same normalized stream the engine saw.
        if (rc.eval.mode == EvalConfig::Mode::PerBeat) {
            auto stream = load_csv_series(rc.input.csv->path, rc.input.csv->schema);
            const auto beats = segment_beats(stream, *rc.input.csv->beat_len);
            std::vector<ScoredItem> base_items;
            for (const Beat& b : beats) {
                if (!b.label) throw MetricError("evaluation requires labels on every beat");
                std::vector<SignalFrame> frames;
                frames.reserve(b.samples.size());
                for (std::size_t i = 0; i < b.samples.size(); ++i)
                    frames.push_back(SignalFrame{static_cast<std::int64_t>(i), b.samples[i], {}});
                const auto pts = leaky_baseline_run(*rc.eval.baseline_gamma, frames);
                double mean = 0.0;
                for (const BaselinePoint& p : pts) mean += p.score;
                if (!pts.empty()) mean /= static_cast<double>(pts.size());
                base_items.push_back(ScoredItem{mean, *b.label});
            }
            baseline_auc = roc_auc(base_items);
        } else {
            const auto stream = detail::load_stream(rc);
            const auto pts = leaky_baseline_run(*rc.eval.baseline_gamma, stream);
            std::vector<ScoredItem> base_items;
            for (std::size_t i = 0; i < stream.size(); ++i)
                if (stream[i].label)
                    base_items.push_back(ScoredItem{pts[i].score, *stream[i].label});
            baseline_auc = roc_auc(base_items);
        }
        j["baseline"] = {{"auc", *baseline_auc}, {"gamma", *rc.eval.baseline_gamma}};
    }

    detail::write_json(rc.output.path(rc.output.report_json), j);
    detail::write_roc_csv(rc.output.path(rc.output.roc_csv), points);

    out << "evaluate: engine_auc=" << format_double(engine_auc);
    if (baseline_auc) out << " baseline_auc=" << format_double(*baseline_auc);
    out << " report=" << rc.output.path(rc.output.report_json) << '\n';
}

// ablate: the v3.x sweep over seeded synthetic streams with paired Wilcoxon
// tests against the first variant.
inline void cmd_ablate(const RunConfig& rc, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    if (!rc.input.synthetic) throw ConfigError("ablate requires input.kind = synthetic");
    if (rc.eval.num_streams < 2) throw ConfigError("ablate requires eval.num_streams >= 2");
    detail::ensure_out_dir(rc.output);

    AblationConfig cfg;
    cfg.engine = rc.engine;
    cfg.stream_spec = *rc.input.synthetic;
    cfg.variants = rc.eval.variants;
    cfg.n_streams = rc.eval.num_streams;
    cfg.base_seed = rc.engine.seed;

    const AblationReport report = run_ablation(cfg);

    int failed = 0;
    for (const AblationCell& c : report.cells)
        if (!c.error.empty()) {
            ++failed;
            err << "ablate: cell (" << c.variant << ", stream " << c.stream_id
                << ") failed: " << c.error << '\n';
        }

    detail::write_json(rc.output.path(rc.output.report_json), detail::report_to_json(report));
    detail::write_ablation_csv(rc.output.path(rc.output.report_csv), report);

    out << "ablate: variants=" << report.variants.size() << " streams=" << report.n_streams
        << " failed_cells=" << failed;
    for (const VariantSummary& s : report.summaries)
        out << ' ' << s.variant << "=" << format_double(s.mean_auc);
    out << " report=" << rc.output.path(rc.output.report_json) << '\n';
}

}  // namespace sgemas
