#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sgemas/errors.hpp"
#include "sgemas/rng.hpp"

namespace sgemas {

// One timestamped, optionally labeled sample of the input stream.
struct SignalFrame {
    std::int64_t t = 0;
    double value = 0.0;
    std::optional<bool> label;  // ground-truth anomaly flag; absent for unlabeled streams
};

enum class SegmentKind { Quiescent, Chaos, AnomalyBurst, Tachycardia, Bradycardia };

inline const char* to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::Quiescent: return "quiescent";
        case SegmentKind::Chaos: return "chaos";
        case SegmentKind::AnomalyBurst: return "anomaly_burst";
        case SegmentKind::Tachycardia: return "tachycardia";
        case SegmentKind::Bradycardia: return "bradycardia";
    }
    return "?";
}

inline SegmentKind segment_kind_from_string(const std::string& s) {
    if (s == "quiescent") return SegmentKind::Quiescent;
    if (s == "chaos") return SegmentKind::Chaos;
    if (s == "anomaly_burst") return SegmentKind::AnomalyBurst;
    if (s == "tachycardia") return SegmentKind::Tachycardia;
    if (s == "bradycardia") return SegmentKind::Bradycardia;
    throw ConfigError("unknown segment kind '" + s + "'");
}

struct Segment {
    SegmentKind kind = SegmentKind::Quiescent;
    std::int64_t start = 0;
    std::int64_t len = 0;
    double intensity = 0.0;
};

// Synthetic stream description: a baseline oscillation with labeled anomaly
// segments overlaid. Deterministic given the seed.
struct SyntheticSpec {
    std::int64_t total_len = 0;
    double baseline_amplitude = 1.0;
    double baseline_frequency = 0.01;  // cycles per sample
    std::vector<Segment> segments;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (total_len < 1) throw ConfigError("synthetic.total_len must be >= 1");
        if (noise_sigma < 0.0) throw ConfigError("synthetic.noise_sigma must be >= 0");
        if (baseline_amplitude < 0.0) throw ConfigError("synthetic.baseline_amplitude must be >= 0");
        std::vector<Segment> sorted = segments;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Segment& a, const Segment& b) { return a.start < b.start; });
        std::int64_t prev_end = 0;
        for (const Segment& s : sorted) {
            if (s.len < 0) throw ConfigError("synthetic.segment length must be >= 0");
            if (s.intensity < 0.0) throw ConfigError("synthetic.segment intensity must be >= 0");
            if (s.start < 0 || s.start + s.len > total_len)
                throw ConfigError("synthetic.segment outside [0, total_len)");
            if (s.start < prev_end) throw ConfigError("synthetic.segments overlap");
            prev_end = s.start + s.len;
        }
    }
};

// Fixed-length window of per-beat normalized samples.
struct Beat {
    std::vector<double> samples;
    std::optional<bool> label;  // true iff any contained frame was labeled true
};

namespace detail {

// Logistic-map chaos source at r = 3.99: a standard, seedable generator for
// rough signals. Iterates stay in (0, 1).
class LogisticMap {
public:
    void reseed(Rng& rng) { z_ = 0.1 + 0.8 * rng.uniform01(); }
    double next() {
        z_ = 3.99 * z_ * (1.0 - z_);
        return z_;
    }

private:
    double z_ = 0.37;
};

// Fraction of samples inside an anomaly_burst segment that receive an impulse.
inline constexpr double kBurstImpulseProb = 0.08;

}  // namespace detail

// Generates the labeled synthetic stream described by `spec`. Pure function of
// the spec: identical spec (seed included) yields identical frames.
//
// Segment semantics:
//   chaos         adds intensity-scaled logistic-map iterates to the baseline
//   anomaly_burst adds a sparse Gaussian impulse train scaled by intensity
//   tachycardia   multiplies the baseline frequency by intensity (> 1)
//   bradycardia   multiplies the baseline frequency by intensity (< 1)
//   quiescent     explicit gap; same as no segment
// Frames inside any non-quiescent segment are labeled true.
inline std::vector<SignalFrame> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    detail::LogisticMap chaos;

    std::vector<SignalFrame> out;
    out.reserve(static_cast<std::size_t>(spec.total_len));

    const double two_pi = 2.0 * M_PI;
    double phase = 0.0;
    const Segment* active = nullptr;

    for (std::int64_t t = 0; t < spec.total_len; ++t) {
        const Segment* prev = active;
        active = nullptr;
        for (const Segment& s : spec.segments) {
            if (t >= s.start && t < s.start + s.len) {
                active = &s;
                break;
            }
        }

        double freq_scale = 1.0;
        if (active && (active->kind == SegmentKind::Tachycardia ||
                       active->kind == SegmentKind::Bradycardia)) {
            freq_scale = active->intensity;
        }
        double value = spec.baseline_amplitude * std::sin(phase);
        phase += two_pi * spec.baseline_frequency * freq_scale;

        if (active && active->kind == SegmentKind::Chaos) {
            if (prev != active) chaos.reseed(rng);
            value += active->intensity * chaos.next();
        } else if (active && active->kind == SegmentKind::AnomalyBurst) {
            if (rng.uniform01() < detail::kBurstImpulseProb)
                value += active->intensity * rng.normal();
        }

        if (spec.noise_sigma > 0.0) value += spec.noise_sigma * rng.normal();

        const bool anomalous = active && active->kind != SegmentKind::Quiescent;
        out.push_back(SignalFrame{t, value, anomalous});
    }
    return out;
}

// Schema for load_csv_series. Columns are 0-based indices into each row.
struct CsvSchema {
    int value_column = 0;
    std::optional<int> label_column;
    char delimiter = ',';
    bool has_header = false;
};

namespace detail {

inline std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    // Tolerate trailing \r from CRLF files.
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
        cells.back().pop_back();
    return cells;
}

inline double parse_double_cell(const std::string& cell, std::int64_t row, int col) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ec != std::errc{} || ptr != last)
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": cannot parse '" + cell + "' as a number");
    return v;
}

}  // namespace detail

// Reads one SignalFrame per data row; t is the row ordinal (0-based, header
// excluded). The label column, when configured, must hold 0 or 1.
inline std::vector<SignalFrame> load_csv_series(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::vector<SignalFrame> out;
    std::string line;
    std::int64_t file_row = 0;  // 1-based physical row, for error messages
    std::int64_t t = 0;
    bool skipped_header = !schema.has_header;

    while (std::getline(in, line)) {
        ++file_row;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_row(line, schema.delimiter);
        const int needed = std::max(schema.value_column,
                                    schema.label_column.value_or(0));
        if (static_cast<int>(cells.size()) <= needed)
            throw ParseError("row " + std::to_string(file_row) + ": has " +
                             std::to_string(cells.size()) + " columns, need at least " +
                             std::to_string(needed + 1));

        SignalFrame f;
        f.t = t++;
        f.value = detail::parse_double_cell(cells[static_cast<std::size_t>(schema.value_column)],
                                            file_row, schema.value_column);
        if (schema.label_column) {
            const std::string& cell = cells[static_cast<std::size_t>(*schema.label_column)];
            if (cell == "0") {
                f.label = false;
            } else if (cell == "1") {
                f.label = true;
            } else {
                throw ParseError("row " + std::to_string(file_row) + ", column " +
                                 std::to_string(*schema.label_column) + ": label must be 0 or 1, got '" +
                                 cell + "'");
            }
        }
        out.push_back(f);
    }
    return out;
}

// Trailing-window z-score over up to `window_len` samples including the
// current one. Population std; a zero-std window maps to output 0 so constant
// segments stay finite. Labels pass through unchanged.
//
// Sums are anchored at the first sample of the stream to keep the constant
// case exact under floating point.
inline std::vector<SignalFrame> rolling_zscore(const std::vector<SignalFrame>& stream,
                                               std::int64_t window_len) {
    if (window_len < 1) throw ConfigError("window_len must be >= 1");

    std::vector<SignalFrame> out;
    out.reserve(stream.size());
    std::deque<double> window;
    double anchor = stream.empty() ? 0.0 : stream.front().value;
    double sum = 0.0;   // sum of (x - anchor)
    double sum2 = 0.0;  // sum of (x - anchor)^2

    for (const SignalFrame& f : stream) {
        const double d = f.value - anchor;
        window.push_back(f.value);
        sum += d;
        sum2 += d * d;
        if (static_cast<std::int64_t>(window.size()) > window_len) {
            const double old = window.front() - anchor;
            window.pop_front();
            sum -= old;
            sum2 -= old * old;
        }
        const double n = static_cast<double>(window.size());
        const double mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        const double sd = std::sqrt(var);
        SignalFrame g = f;
        g.value = (sd > 0.0) ? (d - mean) / sd : 0.0;
        out.push_back(g);
    }
    return out;
}

// Cuts the stream into non-overlapping beat_len windows, normalizing each to
// zero mean and unit (population) std; a zero-std beat becomes all zeros. The
// trailing partial window is dropped. A stream shorter than beat_len yields an
// empty sequence (callers may warn).
inline std::vector<Beat> segment_beats(const std::vector<SignalFrame>& stream,
                                       std::int64_t beat_len) {
    if (beat_len < 2) throw ConfigError("beat_len must be >= 2");
    std::vector<Beat> beats;
    const std::int64_t n_beats = static_cast<std::int64_t>(stream.size()) / beat_len;
    beats.reserve(static_cast<std::size_t>(n_beats));

    for (std::int64_t b = 0; b < n_beats; ++b) {
        Beat beat;
        beat.samples.reserve(static_cast<std::size_t>(beat_len));
        bool any_label = false;
        bool any_true = false;
        double mean = 0.0;
        for (std::int64_t i = 0; i < beat_len; ++i) {
            const SignalFrame& f = stream[static_cast<std::size_t>(b * beat_len + i)];
            beat.samples.push_back(f.value);
            mean += f.value;
            if (f.label) {
                any_label = true;
                any_true = any_true || *f.label;
            }
        }
        mean /= static_cast<double>(beat_len);
        double var = 0.0;
        for (double v : beat.samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(beat_len);
        const double sd = std::sqrt(var);
        for (double& v : beat.samples) v = (sd > 0.0) ? (v - mean) / sd : 0.0;
        if (any_label) beat.label = any_true;
        beats.push_back(std::move(beat));
    }
    return beats;
}

}  // namespace sgemas
