#include "sdr/dispatch.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sdr/selfcheck.hpp"
#include "sdr/version.hpp"

namespace sdr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// tracks written artifacts so failures leave no partial outputs behind
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    fs::path path(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + (dir_ / name).string());
        out << text;
    }

    void discard_all() {
        for (const auto& name : names_) {
            std::error_code ec;
            fs::remove(dir_ / name, ec);
        }
    }

    void finalize(const std::string& subcommand, const Config& cfg) {
        json manifest;
        manifest["subcommand"] = subcommand;
        manifest["version"] = kVersion;
        manifest["seed"] = cfg.run.seed;
        manifest["config_fnv64"] = hex64(fnv1a64(dump_config(cfg)));
        json files = json::array();
        for (const auto& name : names_)
            files.push_back({{"name", name}, {"fnv64", hex64(fnv1a64(read_file(dir_ / name)))}});
        manifest["files"] = files;
        {
            std::ofstream out(dir_ / "manifest.json", std::ios::binary);
            out << manifest.dump(2) << "\n";
        }
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        json info;
        info["written_utc"] = stamp;
        std::ofstream out(dir_ / "run_info.json", std::ios::binary);
        out << info.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

void run_rabi(const Config& cfg, OutputSet& out, const DispatchOptions& opts,
              std::ostream& log) {
    SequenceOptions sopts;
    sopts.initial = cfg.rabi_initial();
    sopts.samples_per_segment = cfg.rabi.samples_per_segment;
    const ScanResult scan = rabi_scan(cfg.rabi_grid_s(), cfg.pair_params(), cfg.ksm_rates(),
                                      cfg.broadening_spec(), cfg.drive_params(), sopts);
    write_scan_csv(scan, out.path("rabi.csv").string());
    if (opts.dump_members)
        write_members_csv(build_ensemble(cfg.broadening_spec()),
                          out.path("members.csv").string());
    log << "rabi scan: " << scan.abscissa_ns.size() << " points\n";
}

void run_echo_scan(const Config& cfg, OutputSet& out, const DispatchOptions& opts,
                   std::ostream& log) {
    SequenceOptions sopts;
    sopts.initial = cfg.echo_initial();
    sopts.samples_per_segment = cfg.echo.samples_per_segment;
    const ScanResult scan =
        echo_scan(cfg.echo.tau_180_ns * 1e-9, cfg.echo_grid_s(), cfg.pair_params(),
                  cfg.ksm_rates(), cfg.broadening_spec(), cfg.drive_params(),
                  cfg.echo_axis(), sopts);
    write_scan_csv(scan, out.path("echo.csv").string());
    if (opts.dump_members)
        write_members_csv(build_ensemble(cfg.broadening_spec()),
                          out.path("members.csv").string());
    const EchoFeature feature = measure_echo_feature(
        scan, cfg.echo_axis() == EchoScanAxis::TotalLength ? 2.0 * cfg.echo.tau_180_ns
                                                           : cfg.echo.tau_180_ns);
    log << "echo peak at " << feature.peak_ns << " ns, width " << feature.width_ns
        << " ns\n";
}

void run_transient(const Config& cfg, OutputSet& out, std::ostream& log) {
    const double tau = cfg.echo.tau_180_ns * 1e-9;
    const double w1 = cfg.drive_params().rabi_omega1;

    PulseSequence constant_phase;
    constant_phase.segments.push_back({2.0 * tau, w1, cfg.drive.phase_deg, "drive"});
    PulseSequence reversal;
    reversal.segments.push_back({tau, w1, cfg.drive.phase_deg, "dephase"});
    reversal.segments.push_back({tau, w1, cfg.drive.phase_deg + 180.0, "rephase"});

    const TransientModel model = cfg.transient_model();
    const DetectorModel det = cfg.detector_model();
    const double horizon = cfg.transient.horizon_ns * 1e-9;
    const double dt = cfg.transient.dt_ns * 1e-9;
    const double t_sample = cfg.transient.sample_time_ns * 1e-9;
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const PairProjectors proj = electron_pair_projectors(sys);

    auto filtered_trace = [&](const PulseSequence& seq) {
        const Trajectory traj =
            run_sequence(InitialState::member_steady_state(), seq, cfg.pair_params(),
                         cfg.ksm_rates(), cfg.broadening_spec(), cfg.echo.samples_per_segment);
        const Operator& begin = traj.states.front();
        const Operator& end = traj.final_state();
        const double dn_s = ((proj.singlet * end).trace() - (proj.singlet * begin).trace()).real();
        const double dn_t =
            ((proj.triplet() * end).trace() - (proj.triplet() * begin).trace()).real();
        return apply_detector(transient_from_state(dn_s, dn_t, model, horizon, dt), det);
    };

    const CurrentTrace trace_const = filtered_trace(constant_phase);
    const CurrentTrace trace_rev = filtered_trace(reversal);
    write_trace_csv(trace_const, out.path("transient_constant.csv").string());
    write_trace_csv(trace_rev, out.path("transient_reversal.csv").string());

    const double i_const = sample_at(trace_const, t_sample);
    const double i_rev = sample_at(trace_rev, t_sample);
    json summary;
    summary["sample_time_ns"] = cfg.transient.sample_time_ns;
    summary["delta_i_constant_pa"] = i_const * 1e12;
    summary["delta_i_reversal_pa"] = i_rev * 1e12;
    summary["reversal_quenches_less"] = std::abs(i_rev) < std::abs(i_const);
    out.write_text("transient_summary.json", summary.dump(2) + "\n");
    log << "transient at " << cfg.transient.sample_time_ns / 1000.0
        << " us: constant " << i_const * 1e12 << " pA, reversal " << i_rev * 1e12 << " pA\n";
}

void run_levels(const Config& cfg, OutputSet& out, std::ostream& log) {
    const LevelDiagram diagram =
        instantaneous_spectrum(cfg.readout_params().spins, cfg.levels_grid_rad_s());
    write_level_diagram_csv(diagram, out.path("levels.csv").string());
    int flagged = 0;
    for (bool f : diagram.branch_flagged) flagged += f ? 1 : 0;
    log << "level diagram: " << diagram.j.size() << " grid points, " << flagged
        << " flagged branches\n";
}

void run_readout(const Config& cfg, OutputSet& out, const DispatchOptions& opts,
                 std::ostream& log) {
    const ReadoutParams p = cfg.readout_params();
    const NuclearBit bit = opts.readout_bit;
    const ReadoutStages stages = run_readout_stages(p, bit);

    // spin trajectory through the recombination window
    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const Trajectory window =
        evolve(stages.after_sweep, sys, readout_hamiltonian(p.spins, p.ramp.j_max), p.rates,
               0.0, p.tau_life, StepControl{.samples = 129});
    write_trajectory_csv(compute_observables(window, sys, p.rates),
                         out.path("window_trajectory.csv").string());

    // one seeded shot through flash and classification
    SplitMix64 coin = SplitMix64::stream(cfg.run.seed, bit == NuclearBit::Up ? 1 : 2, 0, 777);
    const bool charged = coin.uniform01() < stages.p_charged;
    const double horizon = 4.0 * p.classifier.tau_decay;
    SplitMix64 flash_rng =
        SplitMix64::stream(cfg.run.seed, bit == NuclearBit::Up ? 1 : 2, 1, 778);
    const DecayTrace trace = flash_decay(charged, stages.n_pairs, p.classifier, horizon,
                                         p.stochastic_flash, &flash_rng);
    write_decay_trace_csv(trace, out.path("flash_trace.csv").string());
    const int bit_read = classify_readout(trace, p.classifier);

    json diag;
    diag["bit_under_test"] = (bit == NuclearBit::Up) ? "up" : "down";
    diag["occupied_block"] = stages.sweep.occupied_block;
    diag["min_gap_rad_s"] = stages.sweep.min_gap;
    diag["crossing_rate_rad_s2"] = stages.sweep.crossing_rate;
    diag["follow_probability"] = stages.sweep.follow_probability;
    diag["final_singlet_content"] = stages.sweep.final_singlet_content;
    diag["p_charged"] = stages.p_charged;
    diag["n_pairs"] = stages.n_pairs;
    diag["threshold"] = p.classifier.threshold;
    diag["sampled_charged"] = charged;
    diag["classified_bit"] = bit_read;
    out.write_text("readout_diagnostics.json", diag.dump(2) + "\n");
    log << "readout bit=" << (bit == NuclearBit::Up ? "up" : "down")
        << ": singlet content " << stages.sweep.final_singlet_content << ", p_charged "
        << stages.p_charged << ", classified " << bit_read << "\n";
}

void run_fidelity(const Config& cfg, OutputSet& out, std::ostream& log) {
    const ReadoutParams p = cfg.readout_params();
    const auto table =
        readout_fidelity_vs_pairs(p, cfg.readout.pair_counts, cfg.readout.n_trials,
                                  cfg.run.seed);

    std::ostringstream csv;
    csv << "n_pairs,p_read1_given_up,p_read1_given_down,contrast\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        csv << buf;
    };
    for (const auto& [n_pairs, r] : table) {
        csv << n_pairs << ",";
        emit(r.p_read1_given_up);
        csv << ",";
        emit(r.p_read1_given_down);
        csv << ",";
        emit(r.contrast);
        csv << "\n";
    }
    out.write_text("fidelity.csv", csv.str());

    const FidelityResult at_flash = readout_fidelity(p, cfg.readout.n_trials, cfg.run.seed);
    json summary;
    summary["n_pairs_from_flash"] = photon_budget(p.flash);
    summary["p_read1_given_up"] = at_flash.p_read1_given_up;
    summary["p_read1_given_down"] = at_flash.p_read1_given_down;
    summary["contrast"] = at_flash.contrast;
    summary["n_trials"] = cfg.readout.n_trials;
    out.write_text("fidelity_summary.json", summary.dump(2) + "\n");
    log << "fidelity at flash budget: contrast " << at_flash.contrast << "\n";
}

int run_selfcheck_cmd(const Config& cfg, OutputSet& out, std::ostream& log) {
    const std::vector<SuiteResult> results = run_selfcheck(cfg);
    json report = json::array();
    bool all_pass = true;
    for (const auto& r : results) {
        log << (r.pass ? "PASS" : "FAIL") << "  " << r.name << " (" << r.detail << ")\n";
        report.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        all_pass = all_pass && r.pass;
    }
    out.write_text("selfcheck.json", report.dump(2) + "\n");
    return all_pass ? 0 : 3;
}

}  // namespace

int dispatch(const std::string& subcommand, const Config& cfg, const DispatchOptions& opts,
             std::ostream& log) {
    OutputSet out(cfg.run.output_dir);
    try {
        int code = 0;
        if (subcommand == "rabi") {
            run_rabi(cfg, out, opts, log);
        } else if (subcommand == "echo-scan") {
            run_echo_scan(cfg, out, opts, log);
        } else if (subcommand == "transient") {
            run_transient(cfg, out, log);
        } else if (subcommand == "levels") {
            run_levels(cfg, out, log);
        } else if (subcommand == "readout") {
            run_readout(cfg, out, opts, log);
        } else if (subcommand == "fidelity") {
            run_fidelity(cfg, out, log);
        } else if (subcommand == "selfcheck") {
            code = run_selfcheck_cmd(cfg, out, log);
        } else {
            throw ConfigError("unknown subcommand: " + subcommand);
        }
        if (code == 0) {
            out.finalize(subcommand, cfg);
        } else {
            out.discard_all();
        }
        return code;
    } catch (const ConfigError& e) {
        out.discard_all();
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        out.discard_all();
        log << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace sdr
