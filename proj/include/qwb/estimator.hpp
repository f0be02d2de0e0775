#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <vector>

#include "qwb/circuit.hpp"
#include "qwb/simulator.hpp"

namespace qwb {

/// An estimated complex overlap with its sampling cost and a first-order
/// standard-error estimate (0 in exact mode).
struct InnerProductEstimate {
    Complex value{0.0, 0.0};
    long shots_real = 0;
    long shots_imag = 0;
    double std_error = 0.0;
    bool clamped = false; // swap test hit a negative radicand
};

/// Closed-form shot counts for the four rank-1 overlaps at target precision
/// epsilon (rounded up, floor 1; magnitudes are used for complex inputs).
struct ShotPlan {
    long n_zb = 1;
    long n_v0b = 1;
    long n_v0u0 = 1;
    long n_zu0 = 1;
};

ShotPlan shot_plan(double epsilon, Complex alpha0beta0, Complex zb, Complex v0b, Complex v0u0,
                   Complex zu0);

/// gamma = a / (1 + a <v0|u0>), the rank-1 sensitivity factor.
Complex gamma(Complex alpha0beta0, Complex v0u0);

enum class MitigationMode { None, Mem, MemZne };

const char* mitigation_name(MitigationMode m);
MitigationMode mitigation_from_name(const std::string& name);

/// Post-processing selection. `confusion` is the calibrated readout matrix
/// inverted by MEM; fold_levels are the circuit fold counts run through the
/// whole pipeline (ZNE extrapolates the assembled value across them).
struct MitigationConfig {
    MitigationMode mode = MitigationMode::None;
    double confusion[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    std::vector<int> fold_levels = {0};

    static MitigationConfig none();
    static MitigationConfig mem(const double calibrated[2][2]);
    static MitigationConfig mem_zne(const double calibrated[2][2]);

    bool applies_mem() const { return mode != MitigationMode::None; }
    void validate() const;
};

/// Solves confusion * p_true = p_observed for a 2-outcome distribution;
/// result clipped to [0,1] and renormalized.
std::array<double, 2> mem_correct(const std::array<double, 2>& observed,
                                  const double confusion[2][2]);

/// Forward readout channel: p_observed = confusion * p_true.
std::array<double, 2> apply_readout(const std::array<double, 2>& p_true,
                                    const double confusion[2][2]);

/// Zero-noise extrapolation from fold levels 0 and 1 (noise levels 1 and 3):
/// the line through (1, e1) and (3, e3) evaluated at 0.
double zne_extrapolate(double e1, double e3);

enum class EstimationMode { Exact, Sampled };
enum class OverlapMethod { Hadamard, Swap };

/// Which interference circuit estimates <a|w|b>: Prepared keeps the bra
/// preparer outside the controlled region (prep = A, w = W B A*); Compact
/// uses an empty prep with w = A* W B.
enum class HadamardForm { Prepared, Compact };

/// Per-estimation knobs. `stream` must be a fully derived RNG stream: every
/// concurrent estimation task owns its own.
struct EstimationContext {
    EstimationMode mode = EstimationMode::Exact;
    long shots = 100000;
    NoiseModel noise{};
    MitigationConfig mitigation{};
    HadamardForm form = HadamardForm::Prepared;
    int fold_level = 0;
    std::uint64_t stream = 0;
    std::atomic<long long>* call_counter = nullptr;
};

/// Estimates <a|b> (or <a|mid|b> when mid is given) where |a> = bra_prep|0>
/// and |b> = ket_prep|0>. The Hadamard method runs a real-part circuit and,
/// unless known_real, an imaginary-part circuit at `shots` each. The swap
/// method requires known_real (nonnegative) overlaps and returns
/// sqrt(max(0, 2 P(0) - 1)).
InnerProductEstimate estimate_inner_product(const CircuitSpec& bra_prep,
                                            const CircuitSpec& ket_prep, OverlapMethod method,
                                            bool known_real, const EstimationContext& ctx,
                                            const CircuitSpec* mid = nullptr);

} // namespace qwb
