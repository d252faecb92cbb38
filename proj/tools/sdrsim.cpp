#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdr/dispatch.hpp"
#include "sdr/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sdr::ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-dependent recombination simulator"};
    app.set_version_flag("--version", sdr::kVersion);

    std::string config_path;
    std::string out_dir;
    std::string bit = "up";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool print_config = false;
    bool dump_members = false;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory (overrides config and SDRSIM_OUT)");
    auto* seed_opt = app.add_option("--seed", seed, "seed override");
    app.add_flag("--print-config", print_config, "echo the resolved configuration and exit");

    app.require_subcommand(0, 1);
    auto* cmd_rabi = app.add_subcommand("rabi", "Rabi nutation scan");
    auto* cmd_echo = app.add_subcommand("echo-scan", "phase-reversal echo scan");
    auto* cmd_transient = app.add_subcommand("transient", "paired photocurrent transients");
    auto* cmd_levels = app.add_subcommand("levels", "exchange level diagram");
    auto* cmd_readout = app.add_subcommand("readout", "single nuclear-bit readout");
    cmd_readout->add_option("--bit", bit, "nuclear bit under test: up or down")
        ->check(CLI::IsMember({"up", "down"}));
    auto* cmd_fidelity = app.add_subcommand("fidelity", "readout fidelity table");
    auto* cmd_selfcheck = app.add_subcommand("selfcheck", "run the invariant suites");
    for (auto* cmd : {cmd_rabi, cmd_echo})
        cmd->add_flag("--dump-members", dump_members, "also write the ensemble members");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }
    seed_set = seed_opt->count() > 0;

    try {
        sdr::Config cfg =
            sdr::parse_config(config_path.empty() ? std::string("{}") : read_file(config_path));
        if (seed_set) cfg.run.seed = seed;
        if (const char* env = std::getenv("SDRSIM_OUT"); env && *env)
            cfg.run.output_dir = env;
        if (!out_dir.empty()) cfg.run.output_dir = out_dir;

        if (print_config) {
            std::cout << sdr::dump_config(cfg);
            return 0;
        }

        std::string subcommand;
        sdr::DispatchOptions opts;
        opts.dump_members = dump_members;
        if (cmd_rabi->parsed()) subcommand = "rabi";
        if (cmd_echo->parsed()) subcommand = "echo-scan";
        if (cmd_transient->parsed()) subcommand = "transient";
        if (cmd_levels->parsed()) subcommand = "levels";
        if (cmd_readout->parsed()) {
            subcommand = "readout";
            opts.readout_bit = (bit == "down") ? sdr::NuclearBit::Down : sdr::NuclearBit::Up;
        }
        if (cmd_fidelity->parsed()) subcommand = "fidelity";
        if (cmd_selfcheck->parsed()) subcommand = "selfcheck";
        if (subcommand.empty()) {
            std::cerr << app.help();
            return 2;
        }
        return sdr::dispatch(subcommand, cfg, opts, std::cout);
    } catch (const sdr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
