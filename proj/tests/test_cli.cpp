#include "lgsynth/cli/commands.hpp"
#include "lgsynth/io/model_file.hpp"
#include "lgsynth/io/run_config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace lgsynth;
using namespace lgsynth::cli;

namespace {

const fs::path kModels = fs::path(LGSYNTH_SOURCE_DIR) / "models";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lgsynth_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

const char* kSmallEvolve = R"(mode = evolve
filter = lowpass
cutoff_hz = 50000
population_size = 12
generations = 6
max_depth = 5
seed = 7
)";

}  // namespace

TEST(ModelFileParse, GrammarAndErrors) {
    const auto m = io::parse_model_file("S = 2, 2\nT = 1 1 # ground\ntype = 1 5\ndomain = 1 1\nparams = 5 +2.5\n");
    EXPECT_EQ(m.source, (std::vector<std::size_t>{2, 2}));
    EXPECT_EQ(m.params, (std::vector<double>{5.0, 2.5}));
    EXPECT_EQ(m.labels, (std::vector<std::string>{"e1", "e2"}));
    EXPECT_THROW(io::parse_model_file(""), io::ParseError);
    EXPECT_THROW(io::parse_model_file("S = 2\nS = 2\n"), io::ParseError);
    EXPECT_THROW(io::parse_model_file("S = 2\nT = 1\ntype = 1\ndomain = 1\nparams = x\n"), io::ParseError);
    EXPECT_THROW(io::parse_model_file("S = 2\nT = 1\ntype = 1\ndomain = 1\nparams = 1\nbogus = 1\n"), io::ParseError);
    EXPECT_THROW(io::parse_model_file("S = 2\nT = 1\ntype = 1\ndomain = 1\nparams = 1\noutputs = 1:sideways\n"),
                 io::ParseError);
}

TEST(CmdModel, HydraulicMatrices) {
    std::ostringstream out, err;
    const auto dir = scratch("model");
    ASSERT_EQ(cmd_model({(kModels / "hydraulic_actuator.model").string(), dir.string()}, out, err), kOk);
    const auto text = out.str();
    EXPECT_NE(text.find("states = v_m f_K"), std::string::npos);
    EXPECT_NE(text.find("A = -0.5000616850275068 -0.01; 149.99999999999997 0"), std::string::npos) << text;
    EXPECT_NE(text.find("B = -7.853981633974484e-05; 0"), std::string::npos) << text;
    EXPECT_NE(text.find("diagnostics = none"), std::string::npos);
    EXPECT_EQ(slurp(dir / "state_space.txt"), text);
}

TEST(CmdModel, ExitCodes) {
    const auto dir = scratch("model_errors");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_model({write_text(dir / "empty.model", "").string(), ""}, out, err), kParseFailure);
    EXPECT_EQ(cmd_model({(dir / "missing.model").string(), ""}, out, err), kParseFailure);
    out.str("");
    EXPECT_EQ(cmd_model({(kModels / "capacitor_loop.model").string(), ""}, out, err), kModelFailure);
    EXPECT_NE(out.str().find("DependentStorage"), std::string::npos);
    // build_graph validation errors are model errors too.
    out.str("");
    const auto bad = write_text(dir / "unpaired.model", "S = 2 2\nT = 1 1\ntype = 1 3\ndomain = 1 1\nparams = 1 1\n");
    EXPECT_EQ(cmd_model({bad.string(), ""}, out, err), kModelFailure);
    EXPECT_NE(out.str().find("UnpairedTwoPort"), std::string::npos);
}

TEST(CmdSimulate, HydraulicPositionAndDeterminism) {
    const auto dir = scratch("simulate");
    SimulateOptions opt;
    opt.model_path = (kModels / "hydraulic_actuator.model").string();
    opt.t_end = 60.0;
    opt.integrate = {0};
    opt.out_dir = dir.string();
    opt.plot = false;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_simulate(opt, out, err), kOk) << err.str();
    EXPECT_FALSE(fs::exists(dir / "trajectory.svg"));
    const auto csv = slurp(dir / "trajectory.csv");
    const auto rows = lines_of(csv);
    ASSERT_EQ(rows.size(), 60001u + 1u);
    const auto header = split_csv_line(rows.front());
    EXPECT_EQ(header, (std::vector<std::string>{"time", "state:v_m", "state:f_K", "output:v_m", "output:f_K",
                                                "integral:v_m"}));
    const auto last = split_csv_line(rows.back());
    EXPECT_NEAR(std::stod(last[0]), 60.0, 1e-9);
    EXPECT_NEAR(std::stod(last.back()), -785.398163 / 150.0, 0.01);

    opt.plot = true;
    ASSERT_EQ(cmd_simulate(opt, out, err), kOk);
    EXPECT_TRUE(fs::exists(dir / "trajectory.svg"));
    EXPECT_EQ(slurp(dir / "trajectory.csv"), csv);
}

TEST(CmdSimulate, RejectsBadOptions) {
    SimulateOptions opt;
    opt.model_path = (kModels / "hydraulic_actuator.model").string();
    opt.out_dir = scratch("simulate_bad").string();
    std::ostringstream out, err;
    opt.t_end = 0.0;
    EXPECT_EQ(cmd_simulate(opt, out, err), kParseFailure);
    opt.t_end = 1.0;
    opt.integrate = {5};
    EXPECT_EQ(cmd_simulate(opt, out, err), kParseFailure);
    opt.integrate.clear();
    opt.model_path = (kModels / "capacitor_loop.model").string();
    EXPECT_EQ(cmd_simulate(opt, out, err), kModelFailure);
}

TEST(CmdSimulate, DivergingModel) {
    // RK4 is unstable once dt far exceeds the RC time constant.
    const auto dir = scratch("simulate_diverge");
    const auto model = write_text(dir / "rc.model", "S = 2 2 3\nT = 1 3 1\ntype = 1 5 2\ndomain = 1 1 1\n"
                                                   "params = 1 1 1e-6\noutputs = 3:across\n");
    SimulateOptions opt;
    opt.model_path = model.string();
    opt.dt = 1.0;
    opt.t_end = 1000.0;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_simulate(opt, out, err), kNonFiniteState);
}

TEST(CmdEvolve, ArtifactsAndReruns) {
    const auto dir = scratch("evolve");
    const auto cfg = write_text(dir / "run.cfg", kSmallEvolve);
    EvolveOptions opt;
    opt.config_path = cfg.string();
    opt.out_dir = (dir / "a").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evolve(opt, out, err), kOk) << err.str();
    for (const char* f : {"netlist.csv", "bode.csv", "stats.csv", "fitness.svg", "complexity.svg", "response.svg",
                          "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;

    const auto stats = lines_of(slurp(dir / "a" / "stats.csv"));
    ASSERT_EQ(stats.size(), 7u);
    EXPECT_EQ(stats.front(), "generation,best_so_far,median,mean,stddev,best_depth,best_size");
    EXPECT_EQ(lines_of(slurp(dir / "a" / "netlist.csv")).front(), "element_id,kind,node_a,node_b,value,unit,tree_node");
    EXPECT_EQ(lines_of(slurp(dir / "a" / "bode.csv")).size(), 201u);

    const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    EXPECT_EQ(manifest["seed"], 7);
    EXPECT_LE(manifest["best_fitness"].get<double>(), manifest["baseline_fitness"].get<double>());
    EXPECT_EQ(io::parse_run_config(manifest["config"].get<std::string>()).evolution.rng_seed, 7u);

    opt.out_dir = (dir / "b").string();
    opt.no_plot = true;
    opt.threads = 3;
    ASSERT_EQ(cmd_evolve(opt, out, err), kOk);
    for (const char* f : {"netlist.csv", "bode.csv", "stats.csv"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_FALSE(fs::exists(dir / "b" / "fitness.svg"));
    EXPECT_FALSE(fs::exists(dir / "b" / "response.svg"));

    opt.out_dir = (dir / "c").string();
    opt.seed = 8;
    ASSERT_EQ(cmd_evolve(opt, out, err), kOk);
    EXPECT_NE(slurp(dir / "a" / "stats.csv"), slurp(dir / "c" / "stats.csv"));
}

TEST(CmdEvolve, ConfigErrors) {
    const auto dir = scratch("evolve_bad");
    std::ostringstream out, err;
    EvolveOptions opt;
    opt.config_path = write_text(dir / "empty.cfg", "").string();
    EXPECT_EQ(cmd_evolve(opt, out, err), kParseFailure);
    opt.config_path = write_text(dir / "rates.cfg", "crossover_rate = 0.5\n").string();
    EXPECT_EQ(cmd_evolve(opt, out, err), kParseFailure);
    opt.config_path = write_text(dir / "bp.cfg", "filter = bandpass\nband_lo_hz = 1000\n").string();
    EXPECT_EQ(cmd_evolve(opt, out, err), kParseFailure);
    opt.config_path = write_text(dir / "key.cfg", "colour = blue\n").string();
    EXPECT_EQ(cmd_evolve(opt, out, err), kParseFailure);
}

TEST(RunConfig, ShippedConfigs) {
    for (const char* name : {"lowpass.cfg", "highpass.cfg", "bandpass.cfg"}) {
        const auto cfg = io::parse_run_config(slurp(kModels / name));
        EXPECT_EQ(cfg.evolution.population_size, 50u) << name;
        EXPECT_EQ(cfg.evolution.generations, 100u) << name;
        EXPECT_EQ(cfg.embryo, synth::EmbryoSpec{}) << name;
    }
    const auto bp = io::parse_run_config(slurp(kModels / "bandpass.cfg"));
    EXPECT_EQ(bp.filter, synth::FilterSpec::band_pass(20e3, 250e3));
}

TEST(RunConfig, RoundTripFuzz) {
    gp::Rng rng(61);
    auto pick = [&](double lo, double hi) { return lo * std::pow(hi / lo, gp::uniform01(rng)); };
    for (int i = 0; i < 500; ++i) {
        io::RunConfig cfg;
        cfg.mode = static_cast<io::RunMode>(gp::uniform_index(rng, 3));
        cfg.plot = gp::uniform_index(rng, 2) == 0;
        cfg.output_dir = "out_" + std::to_string(i);
        if (gp::uniform_index(rng, 2) == 0) cfg.input_path = "model_" + std::to_string(i) + ".model";
        cfg.embryo = {pick(0.1, 100.0), pick(1.0, 1e4), pick(1.0, 1e4)};
        const auto kind = static_cast<synth::FilterKind>(gp::uniform_index(rng, 3));
        const double lo = pick(10.0, 1e5);
        const double hi = kind == synth::FilterKind::BandPass ? lo * pick(1.5, 100.0) : lo;
        cfg.filter = synth::FilterSpec::make(kind, lo, hi, 2 + gp::uniform_index(rng, 500));
        cfg.filter.grid_lo = pick(0.1, lo);
        cfg.filter.grid_hi = hi * pick(1.1, 1e3);
        auto& e = cfg.evolution;
        e.population_size = 2 + gp::uniform_index(rng, 200);
        e.generations = 1 + gp::uniform_index(rng, 500);
        e.max_depth = 1 + gp::uniform_index(rng, 12);
        e.mutation_rate = 0.25 * gp::uniform01(rng);
        e.reproduction_rate = 0.25 * gp::uniform01(rng);
        e.crossover_rate = 1.0 - e.mutation_rate - e.reproduction_rate;
        if (std::abs(e.crossover_rate + e.mutation_rate + e.reproduction_rate - 1.0) > 1e-12) continue;
        e.selection = gp::uniform_index(rng, 2) == 0 ? gp::Selection::roulette()
                                                     : gp::Selection::tournament(1 + gp::uniform_index(rng, 9));
        e.elitism_count = gp::uniform_index(rng, e.population_size);
        e.rng_seed = rng();
        e.threads = 1 + gp::uniform_index(rng, 8);
        ASSERT_NO_THROW(cfg.validate());
        const auto text = io::serialize(cfg);
        io::RunConfig back;
        ASSERT_NO_THROW(back = io::parse_run_config(text)) << text;
        ASSERT_EQ(back, cfg) << text;
    }
}

TEST(KeyValue, FormatDoubleRoundTrips) {
    gp::Rng rng(71);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(gp::uniform01(rng) - 0.5, static_cast<int>(gp::uniform_index(rng, 200)) - 100);
        EXPECT_EQ(io::parse_double(io::format_double(v), "v"), v);
    }
}

TEST(Logging, EnvironmentLevel) {
    ::setenv("LGSYNTH_LOG", "debug", 1);
    EXPECT_EQ(log_level_from_env(), LogLevel::Debug);
    ::setenv("LGSYNTH_LOG", "0", 1);
    EXPECT_EQ(log_level_from_env(), LogLevel::Quiet);
    ::unsetenv("LGSYNTH_LOG");
}
