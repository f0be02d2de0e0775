#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "qwb/circuit.hpp"
#include "qwb/linalg.hpp"

namespace qwb {

/// Hard width limit for the dense statevector path.
inline constexpr std::uint32_t kMaxDenseQubits = 26;
/// Hard width limit for materializing circuit unitaries / oracle vectors.
inline constexpr std::uint32_t kMaxOracleQubits = 12;

/// Normalized amplitude vector over 2^qubit_count basis states.
/// Qubit q is bit q of the basis index (qubit 0 is the least significant bit
/// and, by convention, the measured ancilla).
struct StateVector {
    std::uint32_t qubit_count = 0;
    Vector amplitudes;

    static StateVector zero_state(std::uint32_t n);
};

/// Stochastic error model: depolarizing probability per gate (p1 for
/// one-qubit gates, p2 for two-qubit gates) plus a column-stochastic readout
/// confusion matrix applied to the measured ancilla.
/// readout[i][j] = P(observe i | true outcome j).
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    double readout[2][2] = {{1.0, 0.0}, {0.0, 1.0}};

    static NoiseModel noiseless() { return NoiseModel{}; }

    bool gate_noise_free() const { return p1 == 0.0 && p2 == 0.0; }
    bool readout_is_identity() const {
        return readout[0][0] == 1.0 && readout[0][1] == 0.0 && readout[1][0] == 0.0 &&
               readout[1][1] == 1.0;
    }

    /// Probabilities in [0,1], columns summing to 1 within 1e-9.
    void validate() const;
};

/// Measured-ancilla tallies for one sampling run.
struct ShotResult {
    long shots = 0;
    std::map<std::string, long> counts; // keys "0" and "1"
    std::uint64_t seed = 0;

    double frequency(const std::string& key) const;
};

/// Applies the circuit to a state (noiseless, dense path).
StateVector apply(const CircuitSpec& c, const StateVector& s);

/// P(0) - P(1) of qubit 0 after running c on |0...0>, from exact amplitudes.
/// Uses the product-state fast path when the circuit supports it, otherwise
/// the dense path (subject to kMaxDenseQubits).
double exact_ancilla_statistic(const CircuitSpec& c);

/// Samples `shots` stochastic trajectories of c under the noise model and
/// returns ancilla counts. After each gate a uniformly random non-identity
/// Pauli is inserted on the gate's qubit(s) with probability p1/p2; the final
/// ancilla readout is passed through the confusion matrix. Pure function of
/// its arguments.
ShotResult sample(const CircuitSpec& c, long shots, const NoiseModel& noise, std::uint64_t seed);

/// Materializes the circuit's unitary column by column (n <= kMaxOracleQubits).
Matrix circuit_unitary(const CircuitSpec& c);

/// |0...0> run through a preparer circuit, as a dense vector
/// (n <= kMaxOracleQubits; oracle-side use only).
Vector prepared_state(const CircuitSpec& c);

namespace detail {
/// Both exact evaluation routes, exposed for cross-checking.
std::optional<double> product_ancilla_p0(const CircuitSpec& c);
double dense_ancilla_p0(const CircuitSpec& c);
} // namespace detail

} // namespace qwb
