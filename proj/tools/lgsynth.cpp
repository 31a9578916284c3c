#include "lgsynth/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Linear graph modelling and genetic-programming filter synthesis"};
    app.require_subcommand(1);

    lgsynth::cli::ModelOptions model;
    auto* model_cmd = app.add_subcommand("model", "Derive the state-space model of a linear graph file");
    model_cmd->add_option("file", model.model_path, "Model file")->required();
    model_cmd->add_option("--out", model.out_dir, "Also write state_space.txt into this directory");

    lgsynth::cli::SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Step response of a linear graph model");
    sim_cmd->add_option("file", sim.model_path, "Model file")->required();
    sim_cmd->add_option("--dt", sim.dt, "Integration step (s)")->capture_default_str();
    sim_cmd->add_option("--t-end", sim.t_end, "Simulated time (s)")->capture_default_str();
    sim_cmd->add_option("--integrate", sim.integrate, "Output channel(s) to integrate, 0-based");
    sim_cmd->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
    bool sim_no_plot = false;
    sim_cmd->add_flag("--no-plot", sim_no_plot, "Skip the SVG plot");

    lgsynth::cli::EvolveOptions evo;
    auto* evo_cmd = app.add_subcommand("evolve", "Evolve a passive filter from a run configuration");
    evo_cmd->add_option("config", evo.config_path, "Run configuration file")->required();
    evo_cmd->add_option("--seed", evo.seed, "Override the configured seed");
    evo_cmd->add_option("--out", evo.out_dir, "Override the output directory");
    evo_cmd->add_option("--threads", evo.threads, "Fitness evaluation threads");
    evo_cmd->add_flag("--no-plot", evo.no_plot, "Skip SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lgsynth::cli::kParseFailure;
    }

    try {
        if (*model_cmd) return lgsynth::cli::cmd_model(model, std::cout, std::cerr);
        if (*sim_cmd) {
            sim.plot = !sim_no_plot;
            return lgsynth::cli::cmd_simulate(sim, std::cout, std::cerr);
        }
        return lgsynth::cli::cmd_evolve(evo, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lgsynth::cli::kParseFailure;
    }
}
