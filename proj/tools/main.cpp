#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qwb/experiment.hpp"
#include "qwb/io.hpp"
#include "qwb/simulator.hpp"
#include "qwb/solver.hpp"

namespace {

using namespace qwb;

MitigationConfig make_mitigation(const std::string& name, const NoiseModel& noise) {
    const MitigationMode mode = mitigation_from_name(name);
    switch (mode) {
    case MitigationMode::None: return MitigationConfig::none();
    case MitigationMode::Mem: return MitigationConfig::mem(noise.readout);
    case MitigationMode::MemZne: return MitigationConfig::mem_zne(noise.readout);
    }
    return MitigationConfig::none();
}

void print_report(const SolveReport& report, bool rank1) {
    std::printf("overlap      = %.12g %+.12gi\n", report.overlap.real(), report.overlap.imag());
    std::printf("std_error    = %.6g\n", report.overlap_std_error);
    if (rank1)
        std::printf("gamma        = %.12g %+.12gi\n", report.gamma.real(), report.gamma.imag());
    std::printf("capacitance condition estimate = %.6g\n", report.capacitance_condition);
    if (report.fold_level_values.size() > 1) {
        std::printf("fold-level values:");
        for (double v : report.fold_level_values) std::printf(" %.12g", v);
        std::printf("\n");
    }
    std::printf("inner products (%zu):\n", report.per_inner_product.size());
    for (const auto& e : report.per_inner_product) {
        std::printf("  %-10s re=%+.9f im=%+.9f shots=%ld std=%.3g\n", e.label.c_str(),
                    e.estimate.value.real(), e.estimate.value.imag(),
                    e.estimate.shots_real + e.estimate.shots_imag, e.estimate.std_error);
    }
}

int run_solve(const std::string& problem_path, const std::string& mode_name, long shots,
              std::optional<double> epsilon, const std::string& mitigation_name_arg,
              const std::string& noise_path, std::uint64_t seed, const std::string& out_path) {
    const WoodburyProblem problem = problem_from_json(load_json_file(problem_path));

    NoiseModel noise;
    if (!noise_path.empty()) noise = noise_from_json(load_json_file(noise_path));

    SolveConfig cfg;
    cfg.mode = mode_name == "exact" ? EstimationMode::Exact : EstimationMode::Sampled;
    cfg.shots = shots;
    cfg.noise = noise;
    cfg.mitigation = make_mitigation(mitigation_name_arg, noise);
    cfg.seed = seed;

    const bool rank1 = problem.a_is_identity() && problem.factors.rank() == 1 &&
                       std::abs(problem.factors.c_matrix(0, 0) - Complex(1.0, 0.0)) <= 1e-12;

    if (epsilon) {
        if (!rank1)
            throw std::invalid_argument(
                "--epsilon shot planning is defined for the rank-1, A = I, C = [1] case only");
        // plan from a pilot pass: the closed-form counts need the overlap
        // values, which exact mode supplies at desk scale
        SolveConfig pilot = cfg;
        pilot.mode = EstimationMode::Exact;
        const SolveReport pilot_report = solve_rank1_overlap(problem, pilot);
        const auto& pe = pilot_report.per_inner_product;
        const Complex a0b0 = problem.factors.alphas[0] * problem.factors.betas[0];
        const ShotPlan plan =
            shot_plan(*epsilon, a0b0, pe[0].estimate.value, pe[1].estimate.value,
                      pe[2].estimate.value, pe[3].estimate.value);
        std::printf("shot plan (epsilon=%g): z|b=%ld v0|b=%ld v0|u0=%ld z|u0=%ld\n", *epsilon,
                    plan.n_zb, plan.n_v0b, plan.n_v0u0, plan.n_zu0);
        cfg.plan = plan;
        cfg.mode = EstimationMode::Sampled;
    }

    const SolveReport report = solve_overlap(problem, cfg);
    print_report(report, rank1);
    if (!out_path.empty()) {
        write_estimates_csv(out_path, report.per_inner_product);
        std::printf("estimates written to %s\n", out_path.c_str());
    }
    return 0;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("sizes")) cfg.sizes = j.at("sizes").get<std::vector<int>>();
    if (j.contains("shots_per_inner_product"))
        cfg.shots_per_inner_product = j.at("shots_per_inner_product").get<long>();
    if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
    if (j.contains("mitigations")) {
        cfg.mitigations.clear();
        for (const auto& m : j.at("mitigations"))
            cfg.mitigations.push_back(mitigation_from_name(m.get<std::string>()));
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mode"))
        cfg.mode = j.at("mode").get<std::string>() == "exact" ? EstimationMode::Exact
                                                              : EstimationMode::Sampled;
    return cfg;
}

int run_figure1_cmd(const std::string& config_path, const std::string& out_path) {
    const ExperimentConfig cfg = experiment_from_json(load_json_file(config_path));
    const std::vector<ExperimentRow> rows = run_figure1(cfg);
    write_figure1_csv(out_path, rows);
    const std::string plot_path = out_path + ".plot.csv";
    write_figure1_plot_data(plot_path, rows);
    std::printf("%zu rows written to %s (plot data: %s)\n", rows.size(), out_path.c_str(),
                plot_path.c_str());
    for (const ExperimentRow& r : rows)
        std::printf("  log2N=%-3d %-8s estimate=%.8f rel_err=%.3e (%.3fs)\n", r.log2_n,
                    r.mitigation.c_str(), r.estimate, r.relative_error, r.wall_time_s);
    return 0;
}

int run_verify_conjecture(std::size_t dim_max, int trials, std::uint64_t seed) {
    const ConjectureReport report = verify_conjecture(dim_max, trials, seed);
    std::printf("conjecture check: %d trials, dim <= %zu\n", report.trials, report.dim_max);
    std::printf("max relative deviation between formula and SVD: %.3e (tolerance %.1e)\n",
                report.max_deviation, report.tolerance);
    if (report.counterexamples.empty()) {
        std::printf("no counterexamples found\n");
    } else {
        // the formula is a verified-numerically conjecture: report, don't fail
        std::printf("%zu counterexample(s) found:\n", report.counterexamples.size());
        for (const auto& ce : report.counterexamples)
            std::printf("  trial %zu dim %zu: formula kappa=%.12g svd kappa=%.12g dev=%.3e\n",
                        ce.trial, ce.dim, ce.kappa_formula, ce.kappa_svd, ce.deviation);
    }
    return 0;
}

int run_oracle_check(int trials, std::uint32_t max_qubits, std::uint32_t max_rank,
                     std::uint64_t seed) {
    const OracleCheckReport report = oracle_check(trials, max_qubits, max_rank, seed);
    std::printf("oracle check: %d random instances\n", report.trials);
    std::printf("  max |overlap - dense oracle| overall : %.3e\n", report.max_delta);
    std::printf("  rank-1    : %.3e\n", report.max_delta_rank1);
    std::printf("  rank-k    : %.3e\n", report.max_delta_rankk);
    std::printf("  unitary-A : %.3e\n", report.max_delta_unitary);
    return report.max_delta <= 1e-9 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank-update linear solver with simulated interference-test estimation"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "solve one problem instance from JSON");
    std::string problem_path;
    std::string mode_name = "exact";
    long shots = 100000;
    double epsilon = 0.0;
    bool epsilon_set = false;
    std::string mitigation = "none";
    std::string noise_path;
    std::uint64_t seed = 1;
    std::string out_path;
    solve->add_option("--problem", problem_path, "problem JSON file")->required();
    solve->add_option("--mode", mode_name, "exact|sampled")
        ->check(CLI::IsMember({"exact", "sampled"}));
    solve->add_option("--shots", shots, "shots per inner product (sampled mode)");
    solve->add_option("--epsilon", epsilon, "derive per-overlap shot counts for this precision")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { epsilon_set = true; });
    solve->add_option("--mitigation", mitigation, "none|mem|mem+zne");
    solve->add_option("--noise", noise_path, "noise model JSON file");
    solve->add_option("--seed", seed, "base RNG seed");
    solve->add_option("--out", out_path, "write per-estimate CSV here");

    // figure1
    auto* fig1 = app.add_subcommand("figure1", "run the uniform-instance size sweep");
    std::string fig1_config, fig1_out;
    fig1->add_option("--config", fig1_config, "experiment config JSON")->required();
    fig1->add_option("--out", fig1_out, "output CSV path")->required();

    // verify-conjecture
    auto* vc = app.add_subcommand("verify-conjecture",
                                  "fuzz the closed-form condition number against SVD");
    std::size_t dim_max = 1024;
    int vc_trials = 500;
    std::uint64_t vc_seed = 1;
    vc->add_option("--dim-max", dim_max, "largest vector dimension");
    vc->add_option("--trials", vc_trials, "number of random pairs");
    vc->add_option("--seed", vc_seed, "RNG seed");

    // oracle-check
    auto* oc = app.add_subcommand("oracle-check",
                                  "random instances, exact mode, against the dense oracle");
    int oc_trials = 60;
    std::uint32_t oc_qubits = 4;
    std::uint32_t oc_rank = 3;
    std::uint64_t oc_seed = 1;
    oc->add_option("--trials", oc_trials, "number of random instances");
    oc->add_option("--max-qubits", oc_qubits, "largest register width (<= 6)");
    oc->add_option("--max-rank", oc_rank, "largest update rank");
    oc->add_option("--seed", oc_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_solve(problem_path, mode_name, shots,
                             epsilon_set ? std::optional<double>(epsilon) : std::nullopt,
                             mitigation, noise_path, seed, out_path);
        if (fig1->parsed()) return run_figure1_cmd(fig1_config, fig1_out);
        if (vc->parsed()) return run_verify_conjecture(dim_max, vc_trials, vc_seed);
        if (oc->parsed()) return run_oracle_check(oc_trials, oc_qubits, oc_rank, oc_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
