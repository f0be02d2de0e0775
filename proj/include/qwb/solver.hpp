#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwb/estimator.hpp"

namespace qwb {

/// The low-rank update U C V with U = sum_i alpha_i |u_i><i| and
/// V = sum_j beta_j |j><v_j|, every state given by its preparer circuit.
struct LowRankFactors {
    std::vector<Complex> alphas;
    std::vector<Complex> betas;
    std::vector<CircuitSpec> u_preparers;
    std::vector<CircuitSpec> v_preparers;
    Matrix c_matrix;

    std::size_t rank() const { return alphas.size(); }
    void validate() const;
};

/// A full instance of (A + UCV) x = b with a probe state |z>. A is the
/// identity unless a unitary circuit is given.
struct WoodburyProblem {
    std::optional<CircuitSpec> a_unitary; // empty = identity A
    LowRankFactors factors;
    CircuitSpec b_preparer;
    CircuitSpec z_preparer;
    bool declared_real = false;

    std::uint32_t qubit_count() const { return b_preparer.qubit_count; }
    bool a_is_identity() const { return !a_unitary.has_value(); }
    void validate() const;
};

/// Hermitian observable as a linear combination of unitaries
/// O = sum_i gamma_i W_i.
struct HermitianLCU {
    std::vector<Complex> gammas;
    std::vector<CircuitSpec> w_circuits;

    void validate() const;
};

struct LabeledEstimate {
    std::string label;
    InnerProductEstimate estimate;
};

/// Everything a solve produces besides the overlap itself: the raw
/// inner-product estimates, conditioning of the classically inverted
/// capacitance matrix, the rank-1 sensitivity factor, and the assembled
/// value at each fold level (two entries under ZNE).
struct SolveReport {
    Complex overlap{0.0, 0.0};
    double overlap_std_error = 0.0;
    std::vector<LabeledEstimate> per_inner_product;
    double capacitance_condition = 1.0;
    Complex gamma{0.0, 0.0};
    std::vector<double> fold_level_values;
};

/// Shared solve-time configuration. Estimation tasks run concurrently, each
/// on its own derived RNG stream, so results are schedule-independent.
struct SolveConfig {
    EstimationMode mode = EstimationMode::Exact;
    long shots = 100000;
    std::optional<ShotPlan> plan; // rank-1 per-overlap counts
    NoiseModel noise{};
    MitigationConfig mitigation{};
    HadamardForm form = HadamardForm::Prepared;
    std::uint64_t seed = 0;
    bool parallel = true;
    std::atomic<long long>* call_counter = nullptr;
};

/// <z|x> = <z|b> - a <v0|b><z|u0> / (1 + a <v0|u0>) with a = alpha0 beta0,
/// from four estimated inner products. Requires k = 1, A = I, C = [1].
SolveReport solve_rank1_overlap(const WoodburyProblem& p, const SolveConfig& cfg);

/// General rank-k assembly (A = I): k^2 + 2k + 1 estimated inner products,
/// one k x k classical inversion.
SolveReport solve_rankk_overlap(const WoodburyProblem& p, const SolveConfig& cfg);

/// Rank-k assembly for unitary A = Q: every overlap carries an interposed
/// Q^dagger inside the Hadamard-test circuits.
SolveReport solve_unitary_a_overlap(const WoodburyProblem& p, const SolveConfig& cfg);

/// Picks the solve routine matching the problem shape.
SolveReport solve_overlap(const WoodburyProblem& p, const SolveConfig& cfg);

struct HermitianExpectation {
    double value = 0.0;
    double imag_residue = 0.0;
    double std_error = 0.0;
    std::vector<LabeledEstimate> terms;
};

/// <x|O|x> for the rank-1, A = I case:
/// <b|O|b> - 2 Re(c <b|O|u0>) + |c|^2 <u0|O|u0> with
/// c = alpha0 beta0 <v0|b> / (1 + alpha0 beta0 <v0|u0>). Cross terms are
/// estimated per LCU unitary as <0|B* W_i U0|0>.
HermitianExpectation expectation_hermitian(const WoodburyProblem& p, const HermitianLCU& o,
                                           const SolveConfig& cfg);

} // namespace qwb
