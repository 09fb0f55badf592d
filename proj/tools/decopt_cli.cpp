// Command-line front end: run, sweep, lower-bound, certify-network.
//
//   decopt_cli run method=optimal instance=hard_sc M=1 r=0.1 chi=6 eps=1e-2 out=run.csv
//   decopt_cli sweep --vary K --values 50,100,200,400 instance=hard_sc T=2000 out=sweep
//   decopt_cli lower-bound n=6 d=5
//   decopt_cli certify-network topology=rotating_star n=6

#include "decopt/decopt.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

decopt::Config make_config(const std::string& file, const std::vector<std::string>& assignments) {
    decopt::Config cfg;
    if (!file.empty()) cfg.load_file(file);
    for (const auto& a : assignments) cfg.set_assignment(a);
    return cfg;
}

int cmd_run(const decopt::Config& cfg) {
    const decopt::RunOutcome out = decopt::run_experiment(cfg);
    const std::string path = cfg.str("out", "run.csv");
    decopt::write_csv_file(path, out.record);
    std::cout << out.summary << "\n";
    if (!out.ok) std::cerr << "certification failure:" << out.message << "\n";
    std::cout << "wrote " << path << "\n";
    return out.ok ? 0 : 1;
}

int cmd_sweep(const decopt::Config& cfg, const std::string& key, const std::vector<std::string>& values) {
    const std::string stem = cfg.str("out", "sweep");
    const decopt::SweepResult res = decopt::sweep(cfg, key, values, stem);
    for (const auto& p : res.points) std::cout << key << "=" << p.value << "  " << p.outcome.summary << "\n";
    if (auto s = res.slope()) std::printf("log-log slope of final gap vs %s: %.4f\n", key.c_str(), *s);
    std::cout << "wrote " << stem << "_summary.csv (" << res.points.size() << " rows)\n";
    return res.ok ? 0 : 1;
}

int cmd_lower_bound(const decopt::Config& cfg) {
    const int n = static_cast<int>(cfg.integer("n", 6));
    const int d = static_cast<int>(cfg.integer("d", 5));
    const auto w = decopt::rounds_to_reach_last_coordinate(n, d, cfg.num("tau_com", 1.0), cfg.num("tau_sub", 1.0));
    std::cout << "n=" << n << " d=" << d << " simulated_rounds=" << w.rounds << " floor=" << w.floor_rounds
              << " envelope=" << (w.envelope_ok ? "ok" : "violated");
    if (!w.envelope_ok) std::cout << "@" << w.envelope_violation_round;
    std::cout << " rounds>=" << w.floor_rounds << (w.pass() ? " PASS" : " FAIL") << "\n";
    return w.pass() ? 0 : 1;
}

int cmd_certify(const decopt::Config& cfg, long rounds, int trials) {
    const int n = static_cast<int>(cfg.integer("n", 6));
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    const decopt::TimeVaryingNetwork net = decopt::make_topology(cfg.str("topology", "rotating_star"), n, seed);
    const decopt::ChiCertificate c = decopt::certify_chi(net, rounds, trials, seed);
    std::printf("topology=%s n=%d declared_chi=%.10g certified_chi=%.10g singular_value_chi=%.10g %s\n",
                net.name().c_str(), n, net.chi(), c.chi, c.chi_tight, c.ok ? "PASS" : "FAIL");
    if (!c.ok) std::cerr << c.message << "\n";
    return c.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized non-smooth optimization over time-varying networks"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> assignments;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_file, "key = value file; command-line pairs override it");
        sub->add_option("assignments", assignments, "key=value overrides");
    };

    auto* run = app.add_subcommand("run", "run one experiment and write its CSV");
    add_common(run);

    auto* sw = app.add_subcommand("sweep", "repeat run over values of one key");
    add_common(sw);
    std::string vary;
    std::vector<std::string> values;
    sw->add_option("--vary", vary, "config key to vary")->required();
    sw->add_option("--values", values, "comma-separated values")->delimiter(',');

    auto* lb = app.add_subcommand("lower-bound", "span automaton round count on the hard instance");
    add_common(lb);

    auto* cert = app.add_subcommand("certify-network", "certify the declared chi of a topology");
    add_common(cert);
    long rounds = 32;
    int trials = 100;
    cert->add_option("--rounds", rounds, "rounds to check");
    cert->add_option("--trials", trials, "random mean-zero vectors per round");

    CLI11_PARSE(app, argc, argv);

    try {
        const decopt::Config cfg = make_config(config_file, assignments);
        if (*run) return cmd_run(cfg);
        if (*sw) return cmd_sweep(cfg, vary, values);
        if (*lb) return cmd_lower_bound(cfg);
        if (*cert) return cmd_certify(cfg, rounds, trials);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
