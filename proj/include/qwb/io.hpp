#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qwb/estimator.hpp"
#include "qwb/solver.hpp"

namespace qwb {

// JSON wire formats:
//   circuit    {"qubits": n, "gates": [{"kind": "H", "targets": [0]}, ...]}
//              U1Q/CU1Q carry "matrix": [[re,im] x 4] row-major
//   noise      {"p1": f, "p2": f, "readout": [[..],[..]]}
//   mitigation {"mode": "none"|"mem"|"mem_zne", "confusion": [[..],[..]],
//               "fold_levels": [0,1]}
//   problem    {"qubits": n, "a_part": "identity"|{"unitary": circuit},
//               "alphas": [..], "u_preparers": [..], "betas": [..],
//               "v_preparers": [..], "c_matrix": [[..]], "b_preparer": ..,
//               "z_preparer": .., "declared_real": bool}
// Complex scalars are [re, im] pairs; bare numbers are accepted on input.

nlohmann::json circuit_to_json(const CircuitSpec& c);
CircuitSpec circuit_from_json(const nlohmann::json& j);

nlohmann::json noise_to_json(const NoiseModel& n);
NoiseModel noise_from_json(const nlohmann::json& j);

nlohmann::json mitigation_to_json(const MitigationConfig& m);
MitigationConfig mitigation_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const WoodburyProblem& p);
WoodburyProblem problem_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

/// Estimate rows as CSV: label, re, im, shots, std_error.
std::string estimates_to_csv(const std::vector<LabeledEstimate>& estimates);
void write_estimates_csv(const std::string& path, const std::vector<LabeledEstimate>& estimates);

/// Shortest round-trip-exact decimal form of a double.
std::string format_double(double v);

} // namespace qwb
