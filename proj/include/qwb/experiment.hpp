#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwb/rng.hpp"
#include "qwb/solver.hpp"

namespace qwb {

/// The analytically solvable benchmark family: every preparer is a layer of
/// Hadamards, alpha0 = beta0 = 1, C = [1], so every overlap is 1 and
/// <z|x> = 1/2 independent of size.
WoodburyProblem uniform_rank1_instance(std::uint32_t n);

/// <z|x> computed entirely with dense classical algebra: materialize the
/// prepared states and A + UCV, solve, and take the probe overlap.
/// Register width is capped at kMaxOracleQubits.
Complex dense_overlap_oracle(const WoodburyProblem& p);

enum class ProblemCase { Rank1, RankK, UnitaryA };

/// Random preparer circuit; `entangling` mixes CX gates into the 1q layers.
CircuitSpec random_circuit(Rng& rng, std::uint32_t n, std::size_t gate_count, bool entangling);

/// Random well-conditioned instance of the requested case.
WoodburyProblem random_problem(Rng& rng, std::uint32_t max_qubits, std::uint32_t max_rank,
                               ProblemCase which);

struct ExperimentConfig {
    std::vector<int> sizes = {2, 4, 8, 12, 16, 20};
    long shots_per_inner_product = 100000;
    NoiseModel noise{};
    std::vector<MitigationMode> mitigations = {MitigationMode::None};
    std::uint64_t seed = 1;
    EstimationMode mode = EstimationMode::Exact;

    void validate() const;
};

struct ExperimentRow {
    int log2_n = 0;
    std::string mitigation;
    double estimate = 0.0;
    double exact_value = 0.5; // analytic value for this family
    double relative_error = 0.0;
    double wall_time_s = 0.0;
};

/// Runs the uniform rank-1 family at each (size, mitigation) pair. Rows are
/// computed in parallel; all randomness is derived from (seed, size, task),
/// never from the mitigation mode, so post-processing comparisons stay
/// shot-for-shot paired.
std::vector<ExperimentRow> run_figure1(const ExperimentConfig& cfg);

std::string figure1_csv(const std::vector<ExperimentRow>& rows);
void write_figure1_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

/// Companion plot data: one (log2_n, estimate) column per mitigation.
std::string figure1_plot_data(const std::vector<ExperimentRow>& rows);
void write_figure1_plot_data(const std::string& path, const std::vector<ExperimentRow>& rows);

struct ConjectureCounterexample {
    std::size_t trial = 0;
    std::size_t dim = 0;
    double kappa_formula = 0.0;
    double kappa_svd = 0.0;
    double deviation = 0.0;
};

struct ConjectureReport {
    int trials = 0;
    std::size_t dim_max = 0;
    double max_deviation = 0.0;
    double tolerance = 1e-8;
    std::vector<ConjectureCounterexample> counterexamples;
};

/// Fuzzes the closed-form conditioning formula against the SVD route on
/// random real vectors. Mismatches are findings, not failures: they are
/// collected and reported, never thrown.
ConjectureReport verify_conjecture(std::size_t dim_max, int trials, std::uint64_t seed);

struct OracleCheckReport {
    int trials = 0;
    double max_delta = 0.0;
    double max_delta_rank1 = 0.0;
    double max_delta_rankk = 0.0;
    double max_delta_unitary = 0.0;
};

/// Random problems across all three solver cases, exact mode, against the
/// dense oracle.
OracleCheckReport oracle_check(int trials, std::uint32_t max_qubits, std::uint32_t max_rank,
                               std::uint64_t seed);

} // namespace qwb
