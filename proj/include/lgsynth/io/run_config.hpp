#pragma once

#include "lgsynth/filter_synth.hpp"
#include "lgsynth/gp.hpp"
#include "lgsynth/io/key_value.hpp"

#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace lgsynth::io {

enum class RunMode { Model, Simulate, Evolve };

constexpr std::string_view to_string(RunMode m) noexcept {
    switch (m) {
    case RunMode::Model: return "model";
    case RunMode::Simulate: return "simulate";
    case RunMode::Evolve: return "evolve";
    }
    return "?";
}

struct RunConfig {
    RunMode mode = RunMode::Evolve;
    synth::EmbryoSpec embryo;
    synth::FilterSpec filter;
    gp::EvolutionConfig evolution;
    std::string input_path;
    std::string output_dir = "lgsynth_out";
    bool plot = true;

    void validate() const {
        embryo.validate();
        filter.validate();
        evolution.validate();
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Writes every field, so the text parses back to an identical RunConfig.
inline std::string serialize(const RunConfig& cfg) {
    std::ostringstream out;
    const auto& f = cfg.filter;
    const auto& e = cfg.evolution;
    out << "mode = " << to_string(cfg.mode) << '\n';
    if (!cfg.input_path.empty()) out << "input = " << cfg.input_path << '\n';
    out << "output_dir = " << cfg.output_dir << '\n';
    out << "plot = " << (cfg.plot ? "on" : "off") << '\n';
    out << "source_voltage = " << format_double(cfg.embryo.source_voltage) << '\n';
    out << "source_resistance = " << format_double(cfg.embryo.source_resistance) << '\n';
    out << "load_resistance = " << format_double(cfg.embryo.load_resistance) << '\n';
    out << "filter = " << to_string(f.kind) << '\n';
    if (f.kind == synth::FilterKind::BandPass) {
        out << "band_lo_hz = " << format_double(f.band_lo) << '\n';
        out << "band_hi_hz = " << format_double(f.band_hi) << '\n';
    } else {
        out << "cutoff_hz = " << format_double(f.band_lo) << '\n';
    }
    out << "grid_points = " << f.grid_points << '\n';
    out << "grid_lo_hz = " << format_double(f.grid_lo) << '\n';
    out << "grid_hi_hz = " << format_double(f.grid_hi) << '\n';
    out << "population_size = " << e.population_size << '\n';
    out << "generations = " << e.generations << '\n';
    out << "max_depth = " << e.max_depth << '\n';
    out << "crossover_rate = " << format_double(e.crossover_rate) << '\n';
    out << "mutation_rate = " << format_double(e.mutation_rate) << '\n';
    out << "reproduction_rate = " << format_double(e.reproduction_rate) << '\n';
    if (e.selection.method == gp::Selection::Method::RouletteWheel) {
        out << "selection = roulette\n";
    } else {
        out << "selection = tournament\n";
        out << "tournament_size = " << e.selection.tournament_size << '\n';
    }
    out << "elitism = " << e.elitism_count << '\n';
    out << "seed = " << e.rng_seed << '\n';
    out << "threads = " << e.threads << '\n';
    return out.str();
}

/// Parses a run configuration. Unset fields keep their defaults; the frequency
/// grid defaults to two decades beyond the cutoffs.
inline RunConfig parse_run_config(std::string_view text) {
    const KeyValues kv = parse_key_values(text);
    if (kv.empty()) throw ParseError("configuration is empty");

    static const std::set<std::string> known{
        "mode", "input", "output_dir", "plot", "source_voltage", "source_resistance", "load_resistance", "filter",
        "cutoff_hz", "band_lo_hz", "band_hi_hz", "grid_points", "grid_lo_hz", "grid_hi_hz", "population_size",
        "generations", "max_depth", "crossover_rate", "mutation_rate", "reproduction_rate", "selection",
        "tournament_size", "elitism", "seed", "threads"};
    for (const auto& [key, value] : kv)
        if (!known.contains(key)) throw ParseError("unknown configuration key '" + key + "'");

    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto real = [&](const char* key, double& dst) {
        if (const auto* v = get(key)) dst = parse_double(*v, key);
    };
    auto count = [&](const char* key, std::size_t& dst) {
        if (const auto* v = get(key)) dst = parse_integer<std::size_t>(*v, key);
    };

    RunConfig cfg;
    if (const auto* v = get("mode")) {
        const auto m = lower(*v);
        if (m == "model") cfg.mode = RunMode::Model;
        else if (m == "simulate") cfg.mode = RunMode::Simulate;
        else if (m == "evolve") cfg.mode = RunMode::Evolve;
        else throw ParseError("mode must be model, simulate or evolve");
    }
    if (const auto* v = get("input")) cfg.input_path = *v;
    if (const auto* v = get("output_dir")) cfg.output_dir = *v;
    if (const auto* v = get("plot")) {
        const auto p = lower(*v);
        if (p == "on" || p == "true" || p == "1") cfg.plot = true;
        else if (p == "off" || p == "false" || p == "0") cfg.plot = false;
        else throw ParseError("plot must be on or off");
    }

    real("source_voltage", cfg.embryo.source_voltage);
    real("source_resistance", cfg.embryo.source_resistance);
    real("load_resistance", cfg.embryo.load_resistance);

    synth::FilterKind kind = synth::FilterKind::LowPass;
    if (const auto* v = get("filter")) {
        const auto k = lower(*v);
        if (k == "lowpass") kind = synth::FilterKind::LowPass;
        else if (k == "highpass") kind = synth::FilterKind::HighPass;
        else if (k == "bandpass") kind = synth::FilterKind::BandPass;
        else throw ParseError("filter must be lowpass, highpass or bandpass");
    }
    double lo = cfg.filter.band_lo;
    double hi = cfg.filter.band_hi;
    if (kind == synth::FilterKind::BandPass) {
        if (!get("band_lo_hz") || !get("band_hi_hz")) throw ParseError("bandpass needs band_lo_hz and band_hi_hz");
        if (get("cutoff_hz")) throw ParseError("bandpass takes band_lo_hz/band_hi_hz, not cutoff_hz");
        real("band_lo_hz", lo);
        real("band_hi_hz", hi);
    } else {
        if (get("band_lo_hz") || get("band_hi_hz")) throw ParseError("low/high-pass filters take cutoff_hz");
        real("cutoff_hz", lo);
        hi = lo;
    }
    cfg.filter = synth::FilterSpec::make(kind, lo, hi);
    count("grid_points", cfg.filter.grid_points);
    real("grid_lo_hz", cfg.filter.grid_lo);
    real("grid_hi_hz", cfg.filter.grid_hi);

    auto& e = cfg.evolution;
    count("population_size", e.population_size);
    count("generations", e.generations);
    count("max_depth", e.max_depth);
    real("crossover_rate", e.crossover_rate);
    real("mutation_rate", e.mutation_rate);
    real("reproduction_rate", e.reproduction_rate);
    if (const auto* v = get("selection")) {
        const auto s = lower(*v);
        if (s == "roulette") e.selection = gp::Selection::roulette();
        else if (s == "tournament") e.selection = gp::Selection::tournament(4);
        else throw ParseError("selection must be roulette or tournament");
    }
    if (e.selection.method == gp::Selection::Method::Tournament) {
        count("tournament_size", e.selection.tournament_size);
    } else if (get("tournament_size")) {
        throw ParseError("tournament_size only applies to tournament selection");
    }
    count("elitism", e.elitism_count);
    if (const auto* v = get("seed")) e.rng_seed = parse_integer<std::uint64_t>(*v, "seed");
    count("threads", e.threads);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what());
    }
    return cfg;
}

}  // namespace lgsynth::io
