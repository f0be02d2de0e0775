#include "qwb/circuit.hpp"

#include <cmath>
#include <stdexcept>

namespace qwb {

namespace {

constexpr Complex kOne{1.0, 0.0};
constexpr Complex kZero{0.0, 0.0};
constexpr Complex kI{0.0, 1.0};

} // namespace

Mat2 Mat2::adjoint() const {
    Mat2 out;
    out(0, 0) = std::conj((*this)(0, 0));
    out(0, 1) = std::conj((*this)(1, 0));
    out(1, 0) = std::conj((*this)(0, 1));
    out(1, 1) = std::conj((*this)(1, 1));
    return out;
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
    return out;
}

bool Mat2::is_unitary(double tol) const {
    Mat2 prod = adjoint() * (*this);
    return std::abs(prod(0, 0) - kOne) <= tol && std::abs(prod(0, 1)) <= tol &&
           std::abs(prod(1, 0)) <= tol && std::abs(prod(1, 1) - kOne) <= tol;
}

Mat2 mat2_h() {
    const double s = 1.0 / std::sqrt(2.0);
    return Mat2{{Complex(s, 0), Complex(s, 0), Complex(s, 0), Complex(-s, 0)}};
}
Mat2 mat2_x() { return Mat2{{kZero, kOne, kOne, kZero}}; }
Mat2 mat2_y() { return Mat2{{kZero, -kI, kI, kZero}}; }
Mat2 mat2_z() { return Mat2{{kOne, kZero, kZero, -kOne}}; }
Mat2 mat2_s() { return Mat2{{kOne, kZero, kZero, kI}}; }
Mat2 mat2_sdg() { return Mat2{{kOne, kZero, kZero, -kI}}; }
Mat2 mat2_sx() {
    return Mat2{{Complex(0.5, 0.5), Complex(0.5, -0.5), Complex(0.5, -0.5), Complex(0.5, 0.5)}};
}

Mat2 sqrt_unitary(const Mat2& u) {
    const double off = std::max(std::abs(u(0, 1)), std::abs(u(1, 0)));
    if (off < 1e-14) {
        Mat2 out;
        out(0, 0) = std::sqrt(u(0, 0));
        out(1, 1) = std::sqrt(u(1, 1));
        return out;
    }
    // Unitary matrices are normal: orthonormal eigenbasis, eigenvalues on the
    // unit circle. Principal square root of each eigenvalue.
    const Complex tr = u(0, 0) + u(1, 1);
    const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const Complex disc = std::sqrt(tr * tr - 4.0 * det);
    const Complex l1 = (tr + disc) / 2.0;
    const Complex l2 = (tr - disc) / 2.0;

    Complex v0 = u(0, 1);
    Complex v1 = l1 - u(0, 0);
    const double n = std::sqrt(std::norm(v0) + std::norm(v1));
    v0 /= n;
    v1 /= n;
    // Orthogonal complement is the second eigenvector (normal matrix).
    const Complex w0 = -std::conj(v1);
    const Complex w1 = std::conj(v0);

    const Complex s1 = std::sqrt(l1);
    const Complex s2 = std::sqrt(l2);

    Mat2 out;
    out(0, 0) = s1 * v0 * std::conj(v0) + s2 * w0 * std::conj(w0);
    out(0, 1) = s1 * v0 * std::conj(v1) + s2 * w0 * std::conj(w1);
    out(1, 0) = s1 * v1 * std::conj(v0) + s2 * w1 * std::conj(w0);
    out(1, 1) = s1 * v1 * std::conj(v1) + s2 * w1 * std::conj(w1);
    return out;
}

Mat2 Gate::local_unitary() const {
    switch (kind) {
    case GateKind::H: return mat2_h();
    case GateKind::X: return mat2_x();
    case GateKind::S: return mat2_s();
    case GateKind::Sdg: return mat2_sdg();
    case GateKind::Sx: return mat2_sx();
    case GateKind::Cx: return mat2_x();
    case GateKind::U1q:
    case GateKind::Cu1q: return payload;
    }
    return mat2_x();
}

Gate Gate::adjoint() const {
    switch (kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Cx: return *this;
    case GateKind::S: return Gate::sdg(qubits[0]);
    case GateKind::Sdg: return Gate::s(qubits[0]);
    // No SXDG kind: the adjoint is carried as an explicit 2x2.
    case GateKind::Sx: return Gate::u1q(qubits[0], mat2_sx().adjoint());
    case GateKind::U1q: return Gate::u1q(qubits[0], payload.adjoint());
    case GateKind::Cu1q: return Gate::cu1q(qubits[0], qubits[1], payload.adjoint());
    }
    return *this;
}

bool Gate::operator==(const Gate& other) const {
    if (kind != other.kind || qubits != other.qubits) return false;
    if (kind == GateKind::U1q || kind == GateKind::Cu1q) {
        for (int i = 0; i < 4; ++i)
            if (payload.m[i] != other.payload.m[i]) return false;
    }
    return true;
}

void CircuitSpec::validate() const {
    for (const Gate& g : gates) {
        if (g.qubits[0] >= qubit_count)
            throw std::invalid_argument("circuit: gate target out of range");
        if (g.arity() == 2) {
            if (g.qubits[1] >= qubit_count)
                throw std::invalid_argument("circuit: gate target out of range");
            if (g.qubits[0] == g.qubits[1])
                throw std::invalid_argument("circuit: control and target must be distinct");
        }
        if ((g.kind == GateKind::U1q || g.kind == GateKind::Cu1q) && !g.payload.is_unitary())
            throw std::invalid_argument("circuit: U1Q payload is not unitary");
    }
}

bool CircuitSpec::operator==(const CircuitSpec& other) const {
    return qubit_count == other.qubit_count && gates == other.gates;
}

CircuitSpec uniform_preparer(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("uniform_preparer: need at least one qubit");
    CircuitSpec c{n, {}};
    c.gates.reserve(n);
    for (std::uint32_t q = 0; q < n; ++q) c.gates.push_back(Gate::h(q));
    return c;
}

CircuitSpec inverse(const CircuitSpec& c) {
    CircuitSpec out{c.qubit_count, {}};
    out.gates.reserve(c.gates.size());
    for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) out.gates.push_back(it->adjoint());
    return out;
}

CircuitSpec concat(const CircuitSpec& first, const CircuitSpec& then) {
    if (first.qubit_count != then.qubit_count)
        throw std::invalid_argument("concat: qubit count mismatch");
    CircuitSpec out = first;
    out.gates.insert(out.gates.end(), then.gates.begin(), then.gates.end());
    return out;
}

CircuitSpec shifted(const CircuitSpec& c, std::uint32_t offset, std::uint32_t new_qubit_count) {
    if (c.qubit_count + offset > new_qubit_count)
        throw std::invalid_argument("shifted: register does not fit");
    CircuitSpec out{new_qubit_count, c.gates};
    for (Gate& g : out.gates) {
        g.qubits[0] += offset;
        if (g.arity() == 2) g.qubits[1] += offset;
    }
    return out;
}

namespace {

// Doubly-controlled U via the square-root decomposition:
//   CV(c2,t) CX(c1,c2) CV*(c2,t) CX(c1,c2) CV(c1,t)   with V^2 = U.
void emit_ccu(std::vector<Gate>& out, std::uint32_t c1, std::uint32_t c2, std::uint32_t t,
              const Mat2& u) {
    const Mat2 v = sqrt_unitary(u);
    const Mat2 vdg = v.adjoint();
    out.push_back(Gate::cu1q(c2, t, v));
    out.push_back(Gate::cx(c1, c2));
    out.push_back(Gate::cu1q(c2, t, vdg));
    out.push_back(Gate::cx(c1, c2));
    out.push_back(Gate::cu1q(c1, t, v));
}

} // namespace

CircuitSpec controlled(const CircuitSpec& c) {
    CircuitSpec out{c.qubit_count + 1, {}};
    for (const Gate& g : c.gates) {
        const std::uint32_t q0 = g.qubits[0] + 1;
        const std::uint32_t q1 = g.qubits[1] + 1;
        switch (g.kind) {
        case GateKind::X:
            out.gates.push_back(Gate::cx(0, q0));
            break;
        case GateKind::H:
        case GateKind::S:
        case GateKind::Sdg:
        case GateKind::Sx:
        case GateKind::U1q:
            out.gates.push_back(Gate::cu1q(0, q0, g.local_unitary()));
            break;
        case GateKind::Cx:
            emit_ccu(out.gates, 0, q0, q1, mat2_x());
            break;
        case GateKind::Cu1q:
            emit_ccu(out.gates, 0, q0, q1, g.payload);
            break;
        }
    }
    return out;
}

CircuitSpec fold(const CircuitSpec& c, int foldings) {
    if (foldings < 0) throw std::invalid_argument("fold: negative fold count");
    if (foldings == 0) return c;
    CircuitSpec out{c.qubit_count, {}};
    out.gates.reserve(c.gates.size() * (2 * static_cast<std::size_t>(foldings) + 1));
    for (const Gate& g : c.gates) {
        out.gates.push_back(g);
        const Gate adj = g.adjoint();
        for (int f = 0; f < foldings; ++f) {
            out.gates.push_back(adj);
            out.gates.push_back(g);
        }
    }
    return out;
}

CircuitSpec hadamard_test(const CircuitSpec& prep, const CircuitSpec& w, Part part) {
    if (prep.qubit_count != w.qubit_count)
        throw std::invalid_argument("hadamard_test: prep and w act on different qubit counts");
    if (prep.qubit_count == 0)
        throw std::invalid_argument("hadamard_test: empty register");
    const std::uint32_t n = prep.qubit_count;

    CircuitSpec out{n + 1, {}};
    out.gates.push_back(Gate::h(0));
    if (part == Part::Imag) out.gates.push_back(Gate::sdg(0));
    const CircuitSpec prep_up = shifted(prep, 1, n + 1);
    out.gates.insert(out.gates.end(), prep_up.gates.begin(), prep_up.gates.end());
    const CircuitSpec cw = controlled(w);
    out.gates.insert(out.gates.end(), cw.gates.begin(), cw.gates.end());
    out.gates.push_back(Gate::h(0));
    return out;
}

CircuitSpec swap_test(const CircuitSpec& prep_a, const CircuitSpec& prep_b) {
    if (prep_a.qubit_count != prep_b.qubit_count)
        throw std::invalid_argument("swap_test: register size mismatch");
    if (prep_a.qubit_count == 0)
        throw std::invalid_argument("swap_test: empty register");
    const std::uint32_t n = prep_a.qubit_count;

    CircuitSpec out{2 * n + 1, {}};
    out.gates.push_back(Gate::h(0));
    const CircuitSpec a_up = shifted(prep_a, 1, 2 * n + 1);
    out.gates.insert(out.gates.end(), a_up.gates.begin(), a_up.gates.end());
    const CircuitSpec b_up = shifted(prep_b, 1 + n, 2 * n + 1);
    out.gates.insert(out.gates.end(), b_up.gates.begin(), b_up.gates.end());
    for (std::uint32_t q = 0; q < n; ++q) {
        // Fredkin(anc; x, y) = CX(y,x) CCX(anc,x,y) CX(y,x)
        const std::uint32_t x = 1 + q;
        const std::uint32_t y = 1 + n + q;
        out.gates.push_back(Gate::cx(y, x));
        emit_ccu(out.gates, 0, x, y, mat2_x());
        out.gates.push_back(Gate::cx(y, x));
    }
    out.gates.push_back(Gate::h(0));
    return out;
}

} // namespace qwb
