#include "qwb/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qwb {

using nlohmann::json;

namespace {

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2)
        return Complex(j[0].get<double>(), j[1].get<double>());
    throw std::invalid_argument("expected a number or [re, im] pair");
}

const char* kind_name(GateKind k) {
    switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "SDG";
    case GateKind::Sx: return "SX";
    case GateKind::Cx: return "CX";
    case GateKind::U1q: return "U1Q";
    case GateKind::Cu1q: return "CU1Q";
    }
    return "H";
}

GateKind kind_from_name(const std::string& name) {
    if (name == "H") return GateKind::H;
    if (name == "X") return GateKind::X;
    if (name == "S") return GateKind::S;
    if (name == "SDG") return GateKind::Sdg;
    if (name == "SX") return GateKind::Sx;
    if (name == "CX") return GateKind::Cx;
    if (name == "U1Q") return GateKind::U1q;
    if (name == "CU1Q") return GateKind::Cu1q;
    throw std::invalid_argument("unknown gate kind: " + name);
}

} // namespace

json circuit_to_json(const CircuitSpec& c) {
    json gates = json::array();
    for (const Gate& g : c.gates) {
        json jg;
        jg["kind"] = kind_name(g.kind);
        json targets = json::array();
        targets.push_back(g.qubits[0]);
        if (g.arity() == 2) targets.push_back(g.qubits[1]);
        jg["targets"] = targets;
        if (g.kind == GateKind::U1q || g.kind == GateKind::Cu1q) {
            json m = json::array();
            for (const Complex& z : g.payload.m) m.push_back(complex_to_json(z));
            jg["matrix"] = m;
        }
        gates.push_back(std::move(jg));
    }
    return json{{"qubits", c.qubit_count}, {"gates", std::move(gates)}};
}

CircuitSpec circuit_from_json(const json& j) {
    CircuitSpec c;
    c.qubit_count = j.at("qubits").get<std::uint32_t>();
    for (const json& jg : j.at("gates")) {
        Gate g;
        g.kind = kind_from_name(jg.at("kind").get<std::string>());
        const json& targets = jg.at("targets");
        if (targets.empty() || targets.size() > 2)
            throw std::invalid_argument("gate targets must have one or two entries");
        g.qubits[0] = targets[0].get<std::uint32_t>();
        const bool two = g.arity() == 2;
        if (two != (targets.size() == 2))
            throw std::invalid_argument("gate target count does not match its kind");
        if (two) g.qubits[1] = targets[1].get<std::uint32_t>();
        if (g.kind == GateKind::U1q || g.kind == GateKind::Cu1q) {
            const json& m = jg.at("matrix");
            if (m.size() != 4) throw std::invalid_argument("U1Q matrix must have 4 entries");
            for (int i = 0; i < 4; ++i) g.payload.m[i] = complex_from_json(m[i]);
        }
        c.gates.push_back(std::move(g));
    }
    c.validate();
    return c;
}

json noise_to_json(const NoiseModel& n) {
    return json{{"p1", n.p1},
                {"p2", n.p2},
                {"readout", json::array({json::array({n.readout[0][0], n.readout[0][1]}),
                                         json::array({n.readout[1][0], n.readout[1][1]})})}};
}

NoiseModel noise_from_json(const json& j) {
    NoiseModel n;
    n.p1 = j.value("p1", 0.0);
    n.p2 = j.value("p2", 0.0);
    if (j.contains("readout")) {
        const json& r = j.at("readout");
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) n.readout[i][k] = r.at(i).at(k).get<double>();
    }
    n.validate();
    return n;
}

json mitigation_to_json(const MitigationConfig& m) {
    return json{{"mode", mitigation_name(m.mode)},
                {"confusion", json::array({json::array({m.confusion[0][0], m.confusion[0][1]}),
                                           json::array({m.confusion[1][0], m.confusion[1][1]})})},
                {"fold_levels", m.fold_levels}};
}

MitigationConfig mitigation_from_json(const json& j) {
    MitigationConfig m;
    m.mode = mitigation_from_name(j.at("mode").get<std::string>());
    if (j.contains("confusion")) {
        const json& c = j.at("confusion");
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) m.confusion[i][k] = c.at(i).at(k).get<double>();
    }
    if (j.contains("fold_levels")) {
        m.fold_levels = j.at("fold_levels").get<std::vector<int>>();
    } else if (m.mode == MitigationMode::MemZne) {
        m.fold_levels = {0, 1};
    }
    m.validate();
    return m;
}

json problem_to_json(const WoodburyProblem& p) {
    json j;
    j["qubits"] = p.qubit_count();
    if (p.a_is_identity())
        j["a_part"] = "identity";
    else
        j["a_part"] = json{{"unitary", circuit_to_json(*p.a_unitary)}};
    json alphas = json::array(), betas = json::array();
    for (const Complex& a : p.factors.alphas) alphas.push_back(complex_to_json(a));
    for (const Complex& b : p.factors.betas) betas.push_back(complex_to_json(b));
    j["alphas"] = std::move(alphas);
    j["betas"] = std::move(betas);
    json ups = json::array(), vps = json::array();
    for (const CircuitSpec& c : p.factors.u_preparers) ups.push_back(circuit_to_json(c));
    for (const CircuitSpec& c : p.factors.v_preparers) vps.push_back(circuit_to_json(c));
    j["u_preparers"] = std::move(ups);
    j["v_preparers"] = std::move(vps);
    json cm = json::array();
    for (std::size_t r = 0; r < p.factors.c_matrix.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < p.factors.c_matrix.cols(); ++c)
            row.push_back(complex_to_json(p.factors.c_matrix(r, c)));
        cm.push_back(std::move(row));
    }
    j["c_matrix"] = std::move(cm);
    j["b_preparer"] = circuit_to_json(p.b_preparer);
    j["z_preparer"] = circuit_to_json(p.z_preparer);
    j["declared_real"] = p.declared_real;
    return j;
}

WoodburyProblem problem_from_json(const json& j) {
    WoodburyProblem p;
    const json& a_part = j.at("a_part");
    if (a_part.is_string()) {
        if (a_part.get<std::string>() != "identity")
            throw std::invalid_argument("a_part must be \"identity\" or {\"unitary\": circuit}");
    } else {
        p.a_unitary = circuit_from_json(a_part.at("unitary"));
    }
    for (const json& a : j.at("alphas")) p.factors.alphas.push_back(complex_from_json(a));
    for (const json& b : j.at("betas")) p.factors.betas.push_back(complex_from_json(b));
    for (const json& c : j.at("u_preparers")) p.factors.u_preparers.push_back(circuit_from_json(c));
    for (const json& c : j.at("v_preparers")) p.factors.v_preparers.push_back(circuit_from_json(c));
    const json& cm = j.at("c_matrix");
    const std::size_t k = cm.size();
    p.factors.c_matrix = Matrix(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        if (cm.at(r).size() != k) throw std::invalid_argument("c_matrix must be square");
        for (std::size_t c = 0; c < k; ++c)
            p.factors.c_matrix(r, c) = complex_from_json(cm.at(r).at(c));
    }
    p.b_preparer = circuit_from_json(j.at("b_preparer"));
    p.z_preparer = circuit_from_json(j.at("z_preparer"));
    p.declared_real = j.value("declared_real", false);
    if (j.contains("qubits") && j.at("qubits").get<std::uint32_t>() != p.qubit_count())
        throw std::invalid_argument("problem: qubits field disagrees with the preparers");
    p.validate();
    return p;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[64];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

std::string estimates_to_csv(const std::vector<LabeledEstimate>& estimates) {
    std::ostringstream out;
    out << "label,re,im,shots,std_error\n";
    for (const LabeledEstimate& e : estimates) {
        out << e.label << ',' << format_double(e.estimate.value.real()) << ','
            << format_double(e.estimate.value.imag()) << ','
            << (e.estimate.shots_real + e.estimate.shots_imag) << ','
            << format_double(e.estimate.std_error) << '\n';
    }
    return out.str();
}

void write_estimates_csv(const std::string& path, const std::vector<LabeledEstimate>& estimates) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << estimates_to_csv(estimates);
}

} // namespace qwb
