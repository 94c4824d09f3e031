#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sgemas/engine.hpp"
#include "sgemas/errors.hpp"
#include "sgemas/signal_io.hpp"

namespace sgemas {

// Doubles are written with %.17g so the text roundtrips to the identical bit
// pattern and reruns produce byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kTraceHeader =
    "step,x,mu,free_energy,precision,energy,n_agents,entropy,instability,score,births,deaths,flops_step";

inline void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << kTraceHeader << '\n';
    for (const TraceRecord& r : trace) {
        out << r.step << ',' << format_double(r.x) << ',' << format_double(r.mu) << ','
            << format_double(r.free_energy) << ',' << format_double(r.precision) << ','
            << format_double(r.energy) << ',' << r.n_agents << ',' << format_double(r.entropy)
            << ',' << format_double(r.instability) << ',' << format_double(r.score) << ','
            << r.births << ',' << r.deaths << ',' << r.flops_step << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

// Reads back a trace written by write_trace_csv. Labels and events are not
// part of the file format and come back empty.
inline std::vector<TraceRecord> load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw ParseError("'" + path + "': missing or unexpected trace header");

    std::vector<TraceRecord> trace;
    std::int64_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = detail::split_row(line, ',');
        if (cells.size() != 13)
            throw ParseError("row " + std::to_string(row) + ": expected 13 columns, got " +
                             std::to_string(cells.size()));
        TraceRecord r;
        r.step = static_cast<std::int64_t>(detail::parse_double_cell(cells[0], row, 0));
        r.x = detail::parse_double_cell(cells[1], row, 1);
        r.mu = detail::parse_double_cell(cells[2], row, 2);
        r.free_energy = detail::parse_double_cell(cells[3], row, 3);
        r.precision = detail::parse_double_cell(cells[4], row, 4);
        r.energy = detail::parse_double_cell(cells[5], row, 5);
        r.n_agents = static_cast<int>(detail::parse_double_cell(cells[6], row, 6));
        r.entropy = detail::parse_double_cell(cells[7], row, 7);
        r.instability = detail::parse_double_cell(cells[8], row, 8);
        r.score = detail::parse_double_cell(cells[9], row, 9);
        r.births = static_cast<int>(detail::parse_double_cell(cells[10], row, 10));
        r.deaths = static_cast<int>(detail::parse_double_cell(cells[11], row, 11));
        r.flops_step = static_cast<std::int64_t>(detail::parse_double_cell(cells[12], row, 12));
        trace.push_back(r);
    }
    return trace;
}

// Phase-space export: ordered (entropy, energy) points with the originating
// step and the pass-through label, for external plotting of the (H, E) plane.
inline void write_phase_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "step,entropy,energy,label\n";
    for (const TraceRecord& r : trace) {
        out << r.step << ',' << format_double(r.entropy) << ',' << format_double(r.energy) << ',';
        if (r.label)
            out << (*r.label ? 1 : 0);
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

// Scored evaluation unit (one sample or one beat) with its pass-through label.
struct ScoredUnit {
    std::int64_t index = 0;
    double score = 0.0;
    std::optional<bool> label;
};

inline void write_scored_csv(const std::string& path, const std::vector<ScoredUnit>& units) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "index,score,label\n";
    for (const ScoredUnit& u : units) {
        out << u.index << ',' << format_double(u.score) << ',';
        if (u.label)
            out << (*u.label ? 1 : 0);
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace sgemas
