#include "qwb/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qwb/rng.hpp"

namespace qwb {

namespace {

/// Internal: thrown when a circuit leaves the two-branch product form.
struct ProductPathUnsupported {};

Mat2 pauli_mat(int code) {
    switch (code) {
    case 1: return mat2_x();
    case 2: return mat2_y();
    default: return mat2_z();
    }
}

/// One stochastic Pauli insertion after gate `gate_index`.
struct Insertion {
    std::size_t gate_index = 0;
    int count = 0;                       // 1 or 2 paulis
    int pauli[2] = {0, 0};               // 1 = X, 2 = Y, 3 = Z
    std::uint32_t qubit[2] = {0, 0};
};

// ---------------------------------------------------------------------------
// Dense statevector backend.

struct DenseBackend {
    std::uint32_t n = 0;
    Vector amps;

    void reset(std::uint32_t qubits) {
        n = qubits;
        const std::size_t dim = std::size_t(1) << n;
        amps.assign(dim, Complex(0.0, 0.0));
        amps[0] = Complex(1.0, 0.0);
    }

    void apply_2x2(const Mat2& u, std::uint32_t q) {
        const std::size_t step = std::size_t(1) << q;
        const std::size_t dim = amps.size();
        const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (std::size_t base = 0; base < dim; base += 2 * step) {
            for (std::size_t off = 0; off < step; ++off) {
                const std::size_t i = base + off;
                const std::size_t j = i + step;
                const Complex a = amps[i];
                const Complex b = amps[j];
                amps[i] = u00 * a + u01 * b;
                amps[j] = u10 * a + u11 * b;
            }
        }
    }

    void apply_controlled_2x2(const Mat2& u, std::uint32_t ctrl, std::uint32_t tgt) {
        const std::size_t cb = std::size_t(1) << ctrl;
        const std::size_t tb = std::size_t(1) << tgt;
        const std::size_t dim = amps.size();
        const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cb) != 0 && (i & tb) == 0) {
                const std::size_t j = i | tb;
                const Complex a = amps[i];
                const Complex b = amps[j];
                amps[i] = u00 * a + u01 * b;
                amps[j] = u10 * a + u11 * b;
            }
        }
    }

    void gate(const Gate& g) {
        switch (g.kind) {
        case GateKind::Cx:
            apply_controlled_2x2(mat2_x(), g.qubits[0], g.qubits[1]);
            break;
        case GateKind::Cu1q:
            apply_controlled_2x2(g.payload, g.qubits[0], g.qubits[1]);
            break;
        default:
            apply_2x2(g.local_unitary(), g.qubits[0]);
            break;
        }
    }

    void pauli(int code, std::uint32_t q) { apply_2x2(pauli_mat(code), q); }

    double p0() const {
        double z0 = 0.0, z1 = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            if ((i & 1) == 0)
                z0 += std::norm(amps[i]);
            else
                z1 += std::norm(amps[i]);
        }
        return z0 / (z0 + z1);
    }
};

// ---------------------------------------------------------------------------
// Two-branch product backend.
//
// |state> = sum_a |a>_anc (coeff[a][0] Psi0 + coeff[a][1] Psi1), where Psi0
// and Psi1 are tensor products of normalized per-qubit 2-vectors. Closed
// under one-qubit gates anywhere and controlled gates whose control is the
// ancilla; register inner products then cost O(n). Column 1 stays exactly
// zero until the first ancilla-controlled gate splits the banks.

struct ProductBackend {
    std::uint32_t reg = 0;
    Complex coeff[2][2];
    std::vector<std::array<Complex, 2>> bank0, bank1;
    bool bank1_live = false;

    void reset(std::uint32_t qubits) {
        reg = qubits - 1;
        coeff[0][0] = Complex(1.0, 0.0);
        coeff[0][1] = coeff[1][0] = coeff[1][1] = Complex(0.0, 0.0);
        bank0.assign(reg, {Complex(1.0, 0.0), Complex(0.0, 0.0)});
        bank1.clear();
        bank1_live = false;
    }

    void anc_gate(const Mat2& g) {
        const Complex a0 = coeff[0][0], a1 = coeff[0][1];
        const Complex b0 = coeff[1][0], b1 = coeff[1][1];
        coeff[0][0] = g(0, 0) * a0 + g(0, 1) * b0;
        coeff[0][1] = g(0, 0) * a1 + g(0, 1) * b1;
        coeff[1][0] = g(1, 0) * a0 + g(1, 1) * b0;
        coeff[1][1] = g(1, 0) * a1 + g(1, 1) * b1;
    }

    static void apply_to(std::array<Complex, 2>& v, const Mat2& g) {
        const Complex a = v[0], b = v[1];
        v[0] = g(0, 0) * a + g(0, 1) * b;
        v[1] = g(1, 0) * a + g(1, 1) * b;
    }

    void reg_gate(std::uint32_t r, const Mat2& g) {
        apply_to(bank0[r], g);
        if (bank1_live) apply_to(bank1[r], g);
    }

    void controlled_gate(std::uint32_t r, const Mat2& g) {
        const bool r1z = coeff[1][0] == Complex(0.0, 0.0) && coeff[1][1] == Complex(0.0, 0.0);
        if (r1z) return; // nothing in the |1> branch
        if (!bank1_live) {
            if (coeff[0][0] == Complex(0.0, 0.0)) {
                // only the |1> branch is populated
                apply_to(bank0[r], g);
                return;
            }
            bank1 = bank0;
            bank1_live = true;
            apply_to(bank1[r], g);
            coeff[1][1] = coeff[1][0];
            coeff[1][0] = Complex(0.0, 0.0);
            coeff[0][1] = Complex(0.0, 0.0);
            return;
        }
        const bool diag = coeff[0][1] == Complex(0.0, 0.0) && coeff[1][0] == Complex(0.0, 0.0);
        const bool anti = coeff[0][0] == Complex(0.0, 0.0) && coeff[1][1] == Complex(0.0, 0.0);
        const bool r0z = coeff[0][0] == Complex(0.0, 0.0) && coeff[0][1] == Complex(0.0, 0.0);
        if (diag) {
            apply_to(bank1[r], g);
        } else if (anti) {
            apply_to(bank0[r], g);
        } else if (r0z) {
            apply_to(bank0[r], g);
            apply_to(bank1[r], g);
        } else {
            throw ProductPathUnsupported{};
        }
    }

    void gate(const Gate& g) {
        switch (g.kind) {
        case GateKind::Cx:
        case GateKind::Cu1q:
            if (g.qubits[0] == 0 && g.qubits[1] >= 1)
                controlled_gate(g.qubits[1] - 1, g.local_unitary());
            else
                throw ProductPathUnsupported{};
            break;
        default:
            if (g.qubits[0] == 0)
                anc_gate(g.local_unitary());
            else
                reg_gate(g.qubits[0] - 1, g.local_unitary());
            break;
        }
    }

    void pauli(int code, std::uint32_t q) {
        if (q == 0)
            anc_gate(pauli_mat(code));
        else
            reg_gate(q - 1, pauli_mat(code));
    }

    double p0() const {
        Complex ip(1.0, 0.0);
        if (bank1_live) {
            for (std::uint32_t r = 0; r < reg; ++r)
                ip *= std::conj(bank0[r][0]) * bank1[r][0] + std::conj(bank0[r][1]) * bank1[r][1];
        }
        auto row_weight = [&](int a) {
            double w = std::norm(coeff[a][0]) + std::norm(coeff[a][1]);
            if (bank1_live)
                w += 2.0 * (std::conj(coeff[a][0]) * coeff[a][1] * ip).real();
            return w;
        };
        const double w0 = row_weight(0);
        const double w1 = row_weight(1);
        return w0 / (w0 + w1);
    }
};

template <typename Backend>
double run_trajectory(const CircuitSpec& c, const std::vector<Insertion>& insertions,
                      Backend& backend) {
    backend.reset(c.qubit_count);
    std::size_t ii = 0;
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        backend.gate(c.gates[gi]);
        while (ii < insertions.size() && insertions[ii].gate_index == gi) {
            const Insertion& ins = insertions[ii];
            for (int k = 0; k < ins.count; ++k)
                if (ins.pauli[k] != 0) backend.pauli(ins.pauli[k], ins.qubit[k]);
            ++ii;
        }
    }
    return backend.p0();
}

} // namespace

StateVector StateVector::zero_state(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("state vector needs at least one qubit");
    if (n > kMaxDenseQubits)
        throw SizeCapError("statevector width exceeds the dense simulator cap");
    StateVector s;
    s.qubit_count = n;
    s.amplitudes.assign(std::size_t(1) << n, Complex(0.0, 0.0));
    s.amplitudes[0] = Complex(1.0, 0.0);
    return s;
}

void NoiseModel::validate() const {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw std::invalid_argument("noise model: depolarizing probabilities must be in [0,1]");
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (!(readout[i][j] >= 0.0 && readout[i][j] <= 1.0))
                throw std::invalid_argument("noise model: confusion entries must be in [0,1]");
    for (int j = 0; j < 2; ++j)
        if (std::abs(readout[0][j] + readout[1][j] - 1.0) > 1e-9)
            throw std::invalid_argument("noise model: confusion columns must sum to 1");
}

double ShotResult::frequency(const std::string& key) const {
    auto it = counts.find(key);
    if (it == counts.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(shots);
}

StateVector apply(const CircuitSpec& c, const StateVector& s) {
    if (c.qubit_count != s.qubit_count)
        throw std::invalid_argument("apply: circuit and state qubit counts differ");
    if (s.amplitudes.size() != (std::size_t(1) << s.qubit_count))
        throw std::invalid_argument("apply: amplitude length mismatch");
    c.validate();
    DenseBackend backend;
    backend.n = s.qubit_count;
    backend.amps = s.amplitudes;
    for (const Gate& g : c.gates) backend.gate(g);
    return StateVector{s.qubit_count, std::move(backend.amps)};
}

namespace detail {

std::optional<double> product_ancilla_p0(const CircuitSpec& c) {
    if (c.qubit_count == 0) throw std::invalid_argument("circuit needs at least one qubit");
    ProductBackend backend;
    try {
        static const std::vector<Insertion> none;
        return run_trajectory(c, none, backend);
    } catch (const ProductPathUnsupported&) {
        return std::nullopt;
    }
}

double dense_ancilla_p0(const CircuitSpec& c) {
    if (c.qubit_count == 0) throw std::invalid_argument("circuit needs at least one qubit");
    if (c.qubit_count > kMaxDenseQubits)
        throw SizeCapError("circuit width exceeds the dense simulator cap and has no "
                           "product-state fast path");
    DenseBackend backend;
    static const std::vector<Insertion> none;
    return run_trajectory(c, none, backend);
}

} // namespace detail

double exact_ancilla_statistic(const CircuitSpec& c) {
    c.validate();
    if (auto p0 = detail::product_ancilla_p0(c)) return 2.0 * *p0 - 1.0;
    return 2.0 * detail::dense_ancilla_p0(c) - 1.0;
}

ShotResult sample(const CircuitSpec& c, long shots, const NoiseModel& noise, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
    noise.validate();
    c.validate();

    ProductBackend product;
    DenseBackend dense;
    bool use_product = true;
    double p0_clean;
    if (auto p0 = detail::product_ancilla_p0(c)) {
        p0_clean = *p0;
    } else {
        use_product = false;
        p0_clean = detail::dense_ancilla_p0(c);
    }

    std::vector<double> gate_p(c.gates.size());
    bool any_noise = false;
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        gate_p[gi] = c.gates[gi].arity() == 1 ? noise.p1 : noise.p2;
        if (gate_p[gi] > 0.0) any_noise = true;
    }

    Rng rng(seed);
    const double r00 = noise.readout[0][0];
    const double r01 = noise.readout[0][1];
    long count0 = 0;
    std::vector<Insertion> insertions;

    for (long shot = 0; shot < shots; ++shot) {
        insertions.clear();
        if (any_noise) {
            for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
                const double p = gate_p[gi];
                if (p <= 0.0 || rng.uniform() >= p) continue;
                Insertion ins;
                ins.gate_index = gi;
                const Gate& g = c.gates[gi];
                if (g.arity() == 1) {
                    ins.count = 1;
                    ins.pauli[0] = static_cast<int>(rng.uniform_int(3)) + 1;
                    ins.qubit[0] = g.qubits[0];
                } else {
                    // one of the 15 non-identity two-qubit Paulis
                    const int code = static_cast<int>(rng.uniform_int(15)) + 1;
                    ins.count = 2;
                    ins.pauli[0] = code / 4;
                    ins.pauli[1] = code % 4;
                    ins.qubit[0] = g.qubits[0];
                    ins.qubit[1] = g.qubits[1];
                }
                insertions.push_back(ins);
            }
        }

        double p0;
        if (insertions.empty()) {
            p0 = p0_clean;
        } else if (use_product) {
            try {
                p0 = run_trajectory(c, insertions, product);
            } catch (const ProductPathUnsupported&) {
                if (c.qubit_count > kMaxDenseQubits)
                    throw SizeCapError("noisy trajectory left the product-state form above the "
                                       "dense simulator cap");
                p0 = run_trajectory(c, insertions, dense);
            }
        } else {
            p0 = run_trajectory(c, insertions, dense);
        }

        const double observe0 = r00 * p0 + r01 * (1.0 - p0);
        if (rng.uniform() < observe0) ++count0;
    }

    ShotResult result;
    result.shots = shots;
    result.seed = seed;
    result.counts["0"] = count0;
    result.counts["1"] = shots - count0;
    return result;
}

Matrix circuit_unitary(const CircuitSpec& c) {
    if (c.qubit_count > kMaxOracleQubits)
        throw SizeCapError("circuit_unitary: width exceeds the oracle cap");
    c.validate();
    const std::size_t dim = std::size_t(1) << c.qubit_count;
    Matrix m(dim, dim);
    DenseBackend backend;
    for (std::size_t col = 0; col < dim; ++col) {
        backend.n = c.qubit_count;
        backend.amps.assign(dim, Complex(0.0, 0.0));
        backend.amps[col] = Complex(1.0, 0.0);
        for (const Gate& g : c.gates) backend.gate(g);
        for (std::size_t row = 0; row < dim; ++row) m(row, col) = backend.amps[row];
    }
    return m;
}

Vector prepared_state(const CircuitSpec& c) {
    if (c.qubit_count > kMaxOracleQubits)
        throw SizeCapError("prepared_state: width exceeds the oracle cap");
    c.validate();
    DenseBackend backend;
    backend.reset(c.qubit_count);
    for (const Gate& g : c.gates) backend.gate(g);
    return std::move(backend.amps);
}

} // namespace qwb
