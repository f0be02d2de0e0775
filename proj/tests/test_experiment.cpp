#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qwb/experiment.hpp"
#include "qwb/rng.hpp"
#include "test_util.hpp"

using namespace qwb;

namespace {

/// Strips the wall_time_s column (the only field timing can change).
std::string strip_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(',');
        out << line.substr(0, cut) << '\n';
    }
    return out.str();
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("exact sweep pins every estimate at one half") {
    ExperimentConfig cfg;
    cfg.sizes = {2, 4, 8};
    cfg.mode = EstimationMode::Exact;
    cfg.mitigations = {MitigationMode::None};
    const auto rows = run_figure1(cfg);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(std::abs(row.estimate - 0.5) < 1e-10);
        CHECK(row.exact_value == 0.5);
        CHECK(row.relative_error < 1e-9);
    }
}

TEST_CASE("sampled noiseless sweep stays within one percent") {
    ExperimentConfig cfg;
    cfg.sizes = {2, 6};
    cfg.mode = EstimationMode::Sampled;
    cfg.shots_per_inner_product = 100000;
    cfg.seed = 9;
    const auto rows = run_figure1(cfg);
    for (const auto& row : rows) CHECK(std::abs(row.estimate - 0.5) < 0.01);
}

TEST_CASE("csv output is deterministic apart from the timing column") {
    ExperimentConfig cfg;
    cfg.sizes = {2, 4};
    cfg.mode = EstimationMode::Sampled;
    cfg.shots_per_inner_product = 5000;
    cfg.noise.p1 = 0.01;
    cfg.noise.p2 = 0.01;
    cfg.mitigations = {MitigationMode::None, MitigationMode::Mem, MitigationMode::MemZne};
    cfg.seed = 77;

    const std::string a = figure1_csv(run_figure1(cfg));
    const std::string b = figure1_csv(run_figure1(cfg));
    CHECK(strip_timing(a) == strip_timing(b));
    // plot data carries no timing at all and must be bit-identical
    CHECK(figure1_plot_data(run_figure1(cfg)) == figure1_plot_data(run_figure1(cfg)));
}

TEST_CASE("csv header matches the documented format") {
    ExperimentConfig cfg;
    cfg.sizes = {2};
    cfg.mode = EstimationMode::Exact;
    const std::string csv = figure1_csv(run_figure1(cfg));
    CHECK(csv.rfind("log2_n,mitigation,estimate,exact,relative_error,wall_time_s\n", 0) == 0);
}

TEST_CASE("mem and none rows share identical raw samples at equal seeds") {
    // with readout-only noise, MEM inverts the confusion exactly, so the mem
    // row must be strictly closer to 0.5 than the uncorrected row
    ExperimentConfig cfg;
    cfg.sizes = {4};
    cfg.mode = EstimationMode::Sampled;
    cfg.shots_per_inner_product = 50000;
    cfg.noise.readout[0][0] = 0.95;
    cfg.noise.readout[1][0] = 0.05;
    cfg.noise.readout[0][1] = 0.08;
    cfg.noise.readout[1][1] = 0.92;
    cfg.mitigations = {MitigationMode::None, MitigationMode::Mem};
    cfg.seed = 13;
    const auto rows = run_figure1(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].relative_error < rows[0].relative_error);
}

TEST_CASE("mem+zne beats no post-processing in median under gate noise") {
    NoiseModel noise;
    noise.p1 = 0.004;
    noise.p2 = 0.004;
    noise.readout[0][0] = 0.97;
    noise.readout[1][0] = 0.03;
    noise.readout[0][1] = 0.04;
    noise.readout[1][1] = 0.96;

    std::vector<double> err_none, err_zne;
    for (int s = 0; s < 7; ++s) {
        ExperimentConfig cfg;
        cfg.sizes = {4, 8};
        cfg.mode = EstimationMode::Sampled;
        cfg.shots_per_inner_product = 20000;
        cfg.noise = noise;
        cfg.mitigations = {MitigationMode::None, MitigationMode::MemZne};
        cfg.seed = Rng::derive(5000, {static_cast<std::uint64_t>(s)});
        for (const auto& row : run_figure1(cfg)) {
            if (row.mitigation == "none")
                err_none.push_back(row.relative_error);
            else
                err_zne.push_back(row.relative_error);
        }
    }
    CHECK(testutil::median(err_zne) < testutil::median(err_none));
}

TEST_CASE("experiment config validation") {
    ExperimentConfig empty_sizes;
    empty_sizes.sizes.clear();
    CHECK_THROWS_AS(empty_sizes.validate(), std::invalid_argument);

    ExperimentConfig zero_shots;
    zero_shots.mode = EstimationMode::Sampled;
    zero_shots.shots_per_inner_product = 0;
    CHECK_THROWS_AS(zero_shots.validate(), std::invalid_argument);
}

TEST_CASE("conjecture fuzz run over small dimensions") {
    const ConjectureReport report = verify_conjecture(64, 60, 17);
    CHECK(report.trials == 60);
    CHECK(report.max_deviation <= report.tolerance);
    CHECK(report.counterexamples.empty());
}

TEST_CASE("oracle check across the three cases") {
    const OracleCheckReport report = oracle_check(24, 3, 3, 23);
    CHECK(report.trials == 24);
    CHECK(report.max_delta <= 1e-9);
    CHECK_THROWS_AS(oracle_check(2, 9, 2, 1), std::invalid_argument);
}

TEST_CASE("dense oracle rejects oversized registers") {
    const WoodburyProblem big = uniform_rank1_instance(14);
    CHECK_THROWS_AS(dense_overlap_oracle(big), SizeCapError);
}

TEST_CASE("dense oracle agrees with hand algebra on the uniform instance") {
    // x = u/2 for the all-uniform family, so <z|x> = 1/2 at any size
    for (std::uint32_t n : {1u, 3u, 6u}) {
        const Complex overlap = dense_overlap_oracle(uniform_rank1_instance(n));
        CHECK(std::abs(overlap - Complex(0.5, 0.0)) < 1e-12);
    }
}

} // TEST_SUITE
