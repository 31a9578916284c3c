#pragma once

#include "lgsynth/dynamics.hpp"
#include "lgsynth/filter_synth.hpp"
#include "lgsynth/gp.hpp"
#include "lgsynth/io/csv.hpp"
#include "lgsynth/io/model_file.hpp"
#include "lgsynth/io/run_config.hpp"
#include "lgsynth/io/svg_plot.hpp"
#include "lgsynth/state_space.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lgsynth::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kParseFailure = 1,
    kModelFailure = 2,
    kNonFiniteState = 3,
    kDegenerateRun = 4,
};

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Reads LGSYNTH_LOG (quiet, info, debug or 0-2); defaults to info.
inline LogLevel log_level_from_env() {
    const char* v = std::getenv("LGSYNTH_LOG");
    if (!v) return LogLevel::Info;
    const std::string s = io::lower(v);
    if (s == "quiet" || s == "0") return LogLevel::Quiet;
    if (s == "debug" || s == "2") return LogLevel::Debug;
    return LogLevel::Info;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io::ParseError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

inline std::string format_matrix(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += "; ";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ' ';
            out += io::format_double(m(r, c));
        }
    }
    return out;
}

inline std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + xs[i];
    return out;
}

/// Key-value text of a state-space model; matrices list rows separated by ';'.
inline std::string format_state_space(const lg::StateSpaceModel& ss) {
    std::ostringstream out;
    out << "states = " << join(ss.state_labels) << '\n';
    out << "inputs = " << join(ss.input_labels) << '\n';
    out << "outputs = " << join(ss.output_labels) << '\n';
    out << "dims = " << ss.state_count() << ' ' << ss.input_count() << ' ' << ss.output_count() << '\n';
    out << "A = " << format_matrix(ss.A) << '\n';
    out << "B = " << format_matrix(ss.B) << '\n';
    out << "C = " << format_matrix(ss.C) << '\n';
    out << "D = " << format_matrix(ss.D) << '\n';
    out << "F = " << format_matrix(ss.F) << '\n';
    return out.str();
}

struct ModelOptions {
    std::string model_path;
    std::string out_dir;  // empty: stdout only
};

inline int cmd_model(const ModelOptions& opt, std::ostream& out, std::ostream& err) {
    io::ModelFile file;
    try {
        file = io::parse_model_file(read_file(opt.model_path));
    } catch (const io::ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseFailure;
    }
    try {
        const auto graph = io::to_graph(file);
        const auto tree = lg::select_normal_tree(graph);
        const auto ss = lg::derive_state_space(graph, tree);
        std::string text = format_state_space(ss);
        text += "tree = " + join([&] {
                    std::vector<std::string> ids;
                    for (auto id : tree.branch_ids) ids.push_back(std::to_string(id));
                    return ids;
                }()) + '\n';
        text += "diagnostics = none\n";
        out << text;
        if (!opt.out_dir.empty()) {
            fs::create_directories(opt.out_dir);
            write_file(fs::path(opt.out_dir) / "state_space.txt", text);
        }
    } catch (const ModelError& e) {
        out << "diagnostics = " << to_string(e.code()) << '\n';
        err << "model error: " << e.what() << '\n';
        return kModelFailure;
    }
    return kOk;
}

struct SimulateOptions {
    std::string model_path;
    double dt = 1e-3;
    double t_end = 10.0;
    std::vector<std::size_t> integrate;  // output channel indices, 0-based
    std::string out_dir = "lgsynth_out";
    bool plot = true;
};

/// Step response with every source held at its model amplitude from t = 0.
inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    if (!(opt.dt > 0.0) || !(opt.t_end >= opt.dt)) {
        err << "invalid options: need dt > 0 and t-end >= dt\n";
        return kParseFailure;
    }
    io::ModelFile file;
    try {
        file = io::parse_model_file(read_file(opt.model_path));
    } catch (const io::ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseFailure;
    }

    try {
        const auto graph = io::to_graph(file);
        const auto ss = lg::derive_state_space(graph);
        for (auto ch : opt.integrate) {
            if (ch >= static_cast<std::size_t>(ss.output_count())) {
                err << "invalid options: BadChannel " << ch << '\n';
                return kParseFailure;
            }
        }
        Eigen::VectorXd level(ss.input_count());
        Eigen::Index k = 0;
        for (const auto& e : graph.elements)
            if (lg::is_source(e.kind)) level(k++) = e.param_value;

        const auto tr = dynamics::simulate(ss, dynamics::step_input(level), opt.t_end, opt.dt,
                                           Eigen::VectorXd::Zero(ss.state_count()));
        std::vector<std::vector<double>> integrals;
        for (auto ch : opt.integrate) integrals.push_back(dynamics::integrate_signal(tr, ch));

        std::vector<std::string> header{"time"};
        for (const auto& l : ss.state_labels) header.push_back("state:" + l);
        for (const auto& l : ss.output_labels) header.push_back("output:" + l);
        for (auto ch : opt.integrate) header.push_back("integral:" + ss.output_labels[ch]);
        io::CsvTable csv(header);
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            auto row = csv.row();
            row << tr.times[i];
            for (Eigen::Index s = 0; s < tr.states[i].size(); ++s) row << tr.states[i](s);
            for (Eigen::Index o = 0; o < tr.outputs[i].size(); ++o) row << tr.outputs[i](o);
            for (const auto& integ : integrals) row << integ[i];
        }

        fs::create_directories(opt.out_dir);
        csv.save((fs::path(opt.out_dir) / "trajectory.csv").string());
        if (opt.plot) {
            io::LinePlot plot{"Step response", "time (s)", "value", false, false, {}};
            for (Eigen::Index o = 0; o < ss.output_count(); ++o) {
                io::PlotSeries s{ss.output_labels[static_cast<std::size_t>(o)], tr.times, {}};
                for (const auto& y : tr.outputs) s.y.push_back(y(o));
                plot.series.push_back(std::move(s));
            }
            for (std::size_t j = 0; j < integrals.size(); ++j)
                plot.series.push_back({"integral of " + ss.output_labels[opt.integrate[j]], tr.times, integrals[j]});
            write_file(fs::path(opt.out_dir) / "trajectory.svg", plot.render());
        }
        out << "wrote " << tr.times.size() << " samples to " << (fs::path(opt.out_dir) / "trajectory.csv").string()
            << '\n';
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kModelFailure;
    } catch (const NonFiniteState& e) {
        err << e.what() << '\n';
        return kNonFiniteState;
    }
    return kOk;
}

struct EvolveOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> threads;
    bool no_plot = false;
};

/// Everything a finished evolution run reports, independent of file output.
struct EvolveSummary {
    io::RunConfig config;
    gp::EvolutionResult result;
    synth::CompiledCircuit circuit;
    synth::CircuitResponse response;
    double baseline_fitness = 0.0;
};

inline EvolveSummary run_evolution(const io::RunConfig& cfg, LogLevel log = LogLevel::Quiet,
                                   std::ostream* log_stream = nullptr) {
    const synth::ParameterSampler sampler{cfg.embryo, cfg.filter};
    const auto fitness = [&](const gp::Tree& t) { return synth::evaluate_fitness(t, cfg.embryo, cfg.filter); };

    EvolveSummary s;
    s.config = cfg;
    s.result = gp::evolve(cfg.evolution, fitness, sampler);
    s.circuit = synth::compile_tree(s.result.best, cfg.embryo);
    s.response = synth::evaluate_response(s.circuit, cfg.embryo, cfg.filter);
    s.baseline_fitness = synth::evaluate_fitness(gp::Tree{}, cfg.embryo, cfg.filter);
    if (log_stream && log == LogLevel::Debug) {
        for (const auto& h : s.result.history)
            *log_stream << "gen " << h.generation << " best " << h.best_so_far_fitness << " median "
                        << h.median_fitness << " size " << h.best_size << '\n';
    }
    return s;
}

inline void write_evolution_artifacts(const EvolveSummary& s, const fs::path& dir) {
    fs::create_directories(dir);

    io::CsvTable net({"element_id", "kind", "node_a", "node_b", "value", "unit", "tree_node"});
    for (const auto& r : synth::netlist(s.circuit))
        net.row() << r.element_id << r.kind << r.node_a << r.node_b << r.value << r.unit << r.tree_node;
    net.save((dir / "netlist.csv").string());

    io::CsvTable bode({"freq_hz", "magnitude_v", "target_v", "gain_db"});
    for (const auto& p : s.response.samples)
        bode.row() << p.freq_hz << p.magnitude_v << p.target_v
                   << 20.0 * std::log10(p.magnitude_v / s.config.embryo.source_voltage);
    bode.save((dir / "bode.csv").string());

    io::CsvTable stats({"generation", "best_so_far", "median", "mean", "stddev", "best_depth", "best_size"});
    for (const auto& h : s.result.history)
        stats.row() << h.generation << h.best_so_far_fitness << h.median_fitness << h.mean_fitness
                    << h.fitness_stddev << h.best_depth << h.best_size;
    stats.save((dir / "stats.csv").string());

    std::vector<std::string> artifacts{"netlist.csv", "bode.csv", "stats.csv"};
    if (s.config.plot) {
        std::vector<double> gen, best, median, mean, depth, size;
        for (const auto& h : s.result.history) {
            gen.push_back(static_cast<double>(h.generation));
            best.push_back(h.best_so_far_fitness);
            median.push_back(h.median_fitness);
            mean.push_back(h.mean_fitness);
            depth.push_back(static_cast<double>(h.best_depth));
            size.push_back(static_cast<double>(h.best_size));
        }
        io::LinePlot fit{"Fitness", "generation", "fitness", false, true,
                         {{"best so far", gen, best}, {"median", gen, median}, {"mean", gen, mean}}};
        write_file(dir / "fitness.svg", fit.render());
        io::LinePlot cx{"Structural complexity of best so far", "generation", "count", false, false,
                        {{"depth", gen, depth}, {"size", gen, size}}};
        write_file(dir / "complexity.svg", cx.render());

        std::vector<double> f, v, t;
        for (const auto& p : s.response.samples) {
            f.push_back(p.freq_hz);
            v.push_back(p.magnitude_v);
            t.push_back(p.target_v);
        }
        io::LinePlot fr{"Load voltage magnitude", "frequency (Hz)", "|V_L| (V)", true, false,
                        {{"evolved", f, v}, {"target", f, t}}};
        write_file(dir / "response.svg", fr.render());
        artifacts.insert(artifacts.end(), {"fitness.svg", "complexity.svg", "response.svg"});
    }
    artifacts.push_back("manifest.json");

    nlohmann::ordered_json manifest;
    manifest["seed"] = s.config.evolution.rng_seed;
    manifest["config"] = io::serialize(s.config);
    manifest["filter"] = std::string(synth::to_string(s.config.filter.kind));
    manifest["best_fitness"] = s.result.best_fitness;
    manifest["baseline_fitness"] = s.baseline_fitness;
    manifest["best_tree"] = s.result.best.to_string();
    manifest["best_depth"] = s.result.best.depth();
    manifest["best_size"] = s.result.best.size();
    manifest["evaluations"] = s.result.evaluations;
    manifest["response_ok"] = s.response.ok;
    if (!s.response.ok) manifest["response_failure"] = s.response.failure;
    manifest["artifacts"] = artifacts;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline int cmd_evolve(const EvolveOptions& opt, std::ostream& out, std::ostream& err) {
    io::RunConfig cfg;
    try {
        cfg = io::parse_run_config(read_file(opt.config_path));
        if (opt.seed) cfg.evolution.rng_seed = *opt.seed;
        if (opt.out_dir) cfg.output_dir = *opt.out_dir;
        if (opt.threads) cfg.evolution.threads = *opt.threads;
        if (opt.no_plot) cfg.plot = false;
        cfg.validate();
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kParseFailure;
    }

    const LogLevel level = log_level_from_env();
    const auto summary = run_evolution(cfg, level, &err);
    write_evolution_artifacts(summary, cfg.output_dir);

    if (level != LogLevel::Quiet) {
        out << "best fitness " << summary.result.best_fitness << " (empty circuit " << summary.baseline_fitness
            << ")\n";
        out << "best tree " << summary.result.best.to_string() << '\n';
        out << "artifacts in " << cfg.output_dir << '\n';
    }
    if (!(summary.result.best_fitness < synth::kPenalty)) {
        err << "every individual scored the penalty value\n";
        return kDegenerateRun;
    }
    return kOk;
}

}  // namespace lgsynth::cli
