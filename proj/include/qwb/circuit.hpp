#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qwb/linalg.hpp"

namespace qwb {

/// Row-major 2x2 complex matrix; payload of U1Q/CU1Q gates.
struct Mat2 {
    std::array<Complex, 4> m{};

    Complex& operator()(int r, int c) { return m[r * 2 + c]; }
    const Complex& operator()(int r, int c) const { return m[r * 2 + c]; }

    Mat2 adjoint() const;
    bool is_unitary(double tol = 1e-12) const;

    friend Mat2 operator*(const Mat2& a, const Mat2& b);
};

Mat2 mat2_h();
Mat2 mat2_x();
Mat2 mat2_y();
Mat2 mat2_z();
Mat2 mat2_s();
Mat2 mat2_sdg();
Mat2 mat2_sx();

/// Principal square root of a 2x2 unitary (eigendecomposition route).
Mat2 sqrt_unitary(const Mat2& u);

enum class GateKind : std::uint8_t { H, X, S, Sdg, Sx, Cx, U1q, Cu1q };

/// One gate. Single-qubit kinds use qubits[0]; CX/CU1Q use
/// qubits[0] = control, qubits[1] = target.
struct Gate {
    GateKind kind = GateKind::H;
    std::array<std::uint32_t, 2> qubits{0, 0};
    Mat2 payload{}; // U1q / Cu1q only

    static Gate h(std::uint32_t q) { return {GateKind::H, {q, 0}, {}}; }
    static Gate x(std::uint32_t q) { return {GateKind::X, {q, 0}, {}}; }
    static Gate s(std::uint32_t q) { return {GateKind::S, {q, 0}, {}}; }
    static Gate sdg(std::uint32_t q) { return {GateKind::Sdg, {q, 0}, {}}; }
    static Gate sx(std::uint32_t q) { return {GateKind::Sx, {q, 0}, {}}; }
    static Gate cx(std::uint32_t control, std::uint32_t target) {
        return {GateKind::Cx, {control, target}, {}};
    }
    static Gate u1q(std::uint32_t q, const Mat2& u) { return {GateKind::U1q, {q, 0}, u}; }
    static Gate cu1q(std::uint32_t control, std::uint32_t target, const Mat2& u) {
        return {GateKind::Cu1q, {control, target}, u};
    }

    int arity() const { return (kind == GateKind::Cx || kind == GateKind::Cu1q) ? 2 : 1; }
    std::uint32_t target() const { return arity() == 2 ? qubits[1] : qubits[0]; }
    std::uint32_t control() const { return qubits[0]; }

    /// The 2x2 acting on the target (X for CX, payload for U1Q/CU1Q, ...).
    Mat2 local_unitary() const;
    Gate adjoint() const;

    bool operator==(const Gate& other) const;
};

/// Ordered gate list over a fixed register width.
struct CircuitSpec {
    std::uint32_t qubit_count = 0;
    std::vector<Gate> gates;

    /// Empty circuit (identity) on n qubits.
    static CircuitSpec empty(std::uint32_t n) { return {n, {}}; }

    /// Throws std::invalid_argument on out-of-range targets, coincident
    /// control/target, or a non-unitary payload.
    void validate() const;

    bool operator==(const CircuitSpec& other) const;
};

/// n Hadamard gates: |0..0> -> uniform superposition over 2^n basis states.
CircuitSpec uniform_preparer(std::uint32_t n);

/// Reversed gate order with every gate replaced by its adjoint.
CircuitSpec inverse(const CircuitSpec& c);

/// Same-width sequential composition: `first` acts before `then`.
CircuitSpec concat(const CircuitSpec& first, const CircuitSpec& then);

/// Remaps qubit q -> q + offset on a register of new_qubit_count qubits.
CircuitSpec shifted(const CircuitSpec& c, std::uint32_t offset, std::uint32_t new_qubit_count);

/// Adds a fresh control qubit at index 0 (register shifted up by one).
/// Two-qubit gates are expanded into the H/X/S/SX/CX/U1Q/CU1Q vocabulary via
/// the standard square-root decomposition of doubly-controlled unitaries.
CircuitSpec controlled(const CircuitSpec& c);

/// Gate-level folding: each gate Q becomes Q (Q^dagger Q)^foldings, leaving
/// the ideal unitary unchanged while multiplying circuit length by 2f+1.
CircuitSpec fold(const CircuitSpec& c, int foldings);

enum class Part { Real, Imag };

/// One-ancilla interference test on qubit 0: ancilla statistic
/// P(0) - P(1) equals Re<psi|w|psi> (Imag: S^dagger inserted after the first
/// Hadamard, giving Im<psi|w|psi>), where |psi> = prep|0>.
CircuitSpec hadamard_test(const CircuitSpec& prep, const CircuitSpec& w, Part part);

/// Two-register overlap-magnitude test: ancilla P(0) = (1 + |<a|b>|^2) / 2.
CircuitSpec swap_test(const CircuitSpec& prep_a, const CircuitSpec& prep_b);

} // namespace qwb
