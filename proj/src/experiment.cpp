#include "qwb/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qwb/io.hpp"
#include "qwb/parallel.hpp"
#include "qwb/simulator.hpp"

namespace qwb {

WoodburyProblem uniform_rank1_instance(std::uint32_t n) {
    WoodburyProblem p;
    const CircuitSpec uniform = uniform_preparer(n);
    p.factors.alphas = {Complex(1.0, 0.0)};
    p.factors.betas = {Complex(1.0, 0.0)};
    p.factors.u_preparers = {uniform};
    p.factors.v_preparers = {uniform};
    p.factors.c_matrix = Matrix::identity(1);
    p.b_preparer = uniform;
    p.z_preparer = uniform;
    p.declared_real = true;
    return p;
}

Complex dense_overlap_oracle(const WoodburyProblem& p) {
    p.validate();
    const std::uint32_t n = p.qubit_count();
    if (n > kMaxOracleQubits)
        throw SizeCapError("dense oracle: register width exceeds the oracle cap");
    const std::size_t dim = std::size_t(1) << n;
    const std::size_t k = p.factors.rank();

    Matrix a = p.a_is_identity() ? Matrix::identity(dim) : circuit_unitary(*p.a_unitary);

    Matrix u(dim, k);
    for (std::size_t i = 0; i < k; ++i) {
        const Vector ui = prepared_state(p.factors.u_preparers[i]);
        for (std::size_t r = 0; r < dim; ++r) u(r, i) = p.factors.alphas[i] * ui[r];
    }
    Matrix v(k, dim);
    for (std::size_t j = 0; j < k; ++j) {
        const Vector vj = prepared_state(p.factors.v_preparers[j]);
        for (std::size_t c = 0; c < dim; ++c) v(j, c) = p.factors.betas[j] * std::conj(vj[c]);
    }

    const Matrix m = a + u * (p.factors.c_matrix * v);
    const Vector b = prepared_state(p.b_preparer);
    const Vector z = prepared_state(p.z_preparer);
    const Vector x = direct_solve(m, b);
    return inner(z, x);
}

CircuitSpec random_circuit(Rng& rng, std::uint32_t n, std::size_t gate_count, bool entangling) {
    CircuitSpec c{n, {}};
    c.gates.reserve(gate_count);
    for (std::size_t g = 0; g < gate_count; ++g) {
        const std::uint32_t q = static_cast<std::uint32_t>(rng.uniform_int(n));
        const int pick = static_cast<int>(rng.uniform_int(entangling && n >= 2 ? 7 : 6));
        switch (pick) {
        case 0: c.gates.push_back(Gate::h(q)); break;
        case 1: c.gates.push_back(Gate::x(q)); break;
        case 2: c.gates.push_back(Gate::s(q)); break;
        case 3: c.gates.push_back(Gate::sdg(q)); break;
        case 4: c.gates.push_back(Gate::sx(q)); break;
        case 5: {
            // Haar-ish random 2x2 unitary
            Complex a(rng.normal(), rng.normal());
            Complex b(rng.normal(), rng.normal());
            const double norm = std::sqrt(std::norm(a) + std::norm(b));
            a /= norm;
            b /= norm;
            const double phi = rng.uniform() * 6.283185307179586;
            const Complex ph(std::cos(phi), std::sin(phi));
            Mat2 u;
            u(0, 0) = a;
            u(0, 1) = b;
            u(1, 0) = -std::conj(b) * ph;
            u(1, 1) = std::conj(a) * ph;
            c.gates.push_back(Gate::u1q(q, u));
            break;
        }
        default: {
            std::uint32_t t = static_cast<std::uint32_t>(rng.uniform_int(n - 1));
            if (t >= q) ++t;
            c.gates.push_back(Gate::cx(q, t));
            break;
        }
        }
    }
    return c;
}

WoodburyProblem random_problem(Rng& rng, std::uint32_t max_qubits, std::uint32_t max_rank,
                               ProblemCase which) {
    if (max_qubits < 1) throw std::invalid_argument("random_problem: need at least one qubit");
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.uniform_int(max_qubits));
        std::size_t k = 1;
        if (which != ProblemCase::Rank1 && max_rank >= 2)
            k = 1 + rng.uniform_int(max_rank);

        WoodburyProblem p;
        const std::size_t depth = 2 * n + 2;
        for (std::size_t i = 0; i < k; ++i) {
            p.factors.u_preparers.push_back(random_circuit(rng, n, depth, true));
            p.factors.v_preparers.push_back(random_circuit(rng, n, depth, true));
            // moderate coefficients keep the instances well conditioned
            p.factors.alphas.push_back(Complex(rng.normal(), rng.normal()) * 0.4);
            p.factors.betas.push_back(Complex(rng.normal(), rng.normal()) * 0.4);
        }
        if (which == ProblemCase::Rank1) {
            p.factors.c_matrix = Matrix::identity(1);
        } else {
            Matrix c = Matrix::identity(k);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t cc = 0; cc < k; ++cc)
                    c(r, cc) += Complex(rng.normal(), rng.normal()) * 0.25;
            p.factors.c_matrix = c;
        }
        p.b_preparer = random_circuit(rng, n, depth, true);
        p.z_preparer = random_circuit(rng, n, depth, true);
        if (which == ProblemCase::UnitaryA) p.a_unitary = random_circuit(rng, n, depth, true);
        p.declared_real = false;

        // keep only instances the dense oracle considers comfortably regular
        try {
            const std::size_t dim = std::size_t(1) << n;
            Matrix a = p.a_is_identity() ? Matrix::identity(dim) : circuit_unitary(*p.a_unitary);
            Matrix u(dim, k);
            for (std::size_t i = 0; i < k; ++i) {
                const Vector ui = prepared_state(p.factors.u_preparers[i]);
                for (std::size_t r = 0; r < dim; ++r) u(r, i) = p.factors.alphas[i] * ui[r];
            }
            Matrix v(k, dim);
            for (std::size_t j = 0; j < k; ++j) {
                const Vector vj = prepared_state(p.factors.v_preparers[j]);
                for (std::size_t c = 0; c < dim; ++c)
                    v(j, c) = p.factors.betas[j] * std::conj(vj[c]);
            }
            const Matrix m = a + u * (p.factors.c_matrix * v);
            const std::vector<double> sv = singular_values(m);
            if (sv.back() < 1e-6 || sv.front() / sv.back() > 100.0) continue;
            return p;
        } catch (const SingularMatrixError&) {
            continue;
        }
    }
    throw std::runtime_error("random_problem: could not draw a well-conditioned instance");
}

void ExperimentConfig::validate() const {
    if (sizes.empty()) throw std::invalid_argument("experiment: sizes must be nonempty");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("experiment: sizes must be >= 1");
    if (mode == EstimationMode::Sampled && shots_per_inner_product < 1)
        throw std::invalid_argument("experiment: shots must be >= 1 in sampled mode");
    if (mitigations.empty()) throw std::invalid_argument("experiment: no mitigation modes");
    noise.validate();
}

std::vector<ExperimentRow> run_figure1(const ExperimentConfig& cfg) {
    cfg.validate();

    struct Cell {
        int log2_n;
        MitigationMode mitigation;
    };
    std::vector<Cell> cells;
    for (int n : cfg.sizes)
        for (MitigationMode m : cfg.mitigations) cells.push_back({n, m});

    std::vector<ExperimentRow> rows(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        const Cell& cell = cells[i];
        const WoodburyProblem problem = uniform_rank1_instance(cell.log2_n);

        SolveConfig solve_cfg;
        solve_cfg.mode = cfg.mode;
        solve_cfg.shots = cfg.shots_per_inner_product;
        solve_cfg.noise = cfg.noise;
        switch (cell.mitigation) {
        case MitigationMode::None: solve_cfg.mitigation = MitigationConfig::none(); break;
        case MitigationMode::Mem: solve_cfg.mitigation = MitigationConfig::mem(cfg.noise.readout); break;
        case MitigationMode::MemZne:
            solve_cfg.mitigation = MitigationConfig::mem_zne(cfg.noise.readout);
            break;
        }
        // mitigation does not enter the seed: rows at the same size share shots
        solve_cfg.seed = Rng::derive(cfg.seed, {static_cast<std::uint64_t>(cell.log2_n)});
        solve_cfg.parallel = false; // cells are already parallel

        const auto t0 = std::chrono::steady_clock::now();
        const SolveReport report = solve_rank1_overlap(problem, solve_cfg);
        const auto t1 = std::chrono::steady_clock::now();

        ExperimentRow row;
        row.log2_n = cell.log2_n;
        row.mitigation = mitigation_name(cell.mitigation);
        row.estimate = report.overlap.real();
        row.exact_value = 0.5;
        row.relative_error = std::abs(row.estimate - row.exact_value) / std::abs(row.exact_value);
        row.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        rows[i] = std::move(row);
    });
    return rows;
}

std::string figure1_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << "log2_n,mitigation,estimate,exact,relative_error,wall_time_s\n";
    for (const ExperimentRow& r : rows) {
        out << r.log2_n << ',' << r.mitigation << ',' << format_double(r.estimate) << ','
            << format_double(r.exact_value) << ',' << format_double(r.relative_error) << ','
            << format_double(r.wall_time_s) << '\n';
    }
    return out.str();
}

void write_figure1_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << figure1_csv(rows);
}

std::string figure1_plot_data(const std::vector<ExperimentRow>& rows) {
    std::vector<std::string> mitigations;
    std::vector<int> sizes;
    std::map<std::pair<int, std::string>, double> cells;
    for (const ExperimentRow& r : rows) {
        if (std::find(mitigations.begin(), mitigations.end(), r.mitigation) == mitigations.end())
            mitigations.push_back(r.mitigation);
        if (std::find(sizes.begin(), sizes.end(), r.log2_n) == sizes.end())
            sizes.push_back(r.log2_n);
        cells[{r.log2_n, r.mitigation}] = r.estimate;
    }
    std::ostringstream out;
    out << "log2_n";
    for (const std::string& m : mitigations) out << ',' << m;
    out << '\n';
    for (int n : sizes) {
        out << n;
        for (const std::string& m : mitigations) {
            out << ',';
            auto it = cells.find({n, m});
            if (it != cells.end()) out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

void write_figure1_plot_data(const std::string& path, const std::vector<ExperimentRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << figure1_plot_data(rows);
}

ConjectureReport verify_conjecture(std::size_t dim_max, int trials, std::uint64_t seed) {
    if (dim_max < 2) throw std::invalid_argument("verify_conjecture: dim_max must be >= 2");
    if (std::size_t(1) << kMaxOracleQubits < dim_max)
        throw SizeCapError("verify_conjecture: dim_max exceeds the oracle cap");

    ConjectureReport report;
    report.trials = trials;
    report.dim_max = dim_max;

    for (int t = 0; t < trials; ++t) {
        Rng rng(Rng::derive(seed, {0xC0417u, static_cast<std::uint64_t>(t)}));
        // skew the draw toward small systems, but pin every 100th trial to
        // dim_max so the upper end is always exercised
        std::size_t dim;
        if (t % 100 == 99) {
            dim = dim_max;
        } else {
            const double r = rng.uniform();
            dim = 2 + static_cast<std::size_t>(static_cast<double>(dim_max - 2) * r * r * r);
        }

        std::vector<double> u(dim), v(dim);
        const double su = 0.2 + 1.8 * rng.uniform();
        const double sv = 0.2 + 1.8 * rng.uniform();
        double uv = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            u[i] = rng.normal() * su / std::sqrt(static_cast<double>(dim));
            v[i] = rng.normal() * sv / std::sqrt(static_cast<double>(dim));
            uv += u[i] * v[i];
        }
        if (std::abs(1.0 + uv) < 1e-3) {
            --t; // nearly singular I + u v^T: redraw (precondition of the formula)
            continue;
        }

        const ConjecturedConditioning cc = conjectured_condition(u, v);

        Matrix m = Matrix::identity(dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) m(r, c) += Complex(u[r] * v[c], 0.0);
        const std::vector<double> sv_list = singular_values(m);
        const double kappa_svd = sv_list.front() / sv_list.back();

        const double dev = std::abs(cc.kappa - kappa_svd) / std::max(1.0, kappa_svd);
        report.max_deviation = std::max(report.max_deviation, dev);
        if (dev > report.tolerance)
            report.counterexamples.push_back(
                {static_cast<std::size_t>(t), dim, cc.kappa, kappa_svd, dev});
    }
    return report;
}

OracleCheckReport oracle_check(int trials, std::uint32_t max_qubits, std::uint32_t max_rank,
                               std::uint64_t seed) {
    if (max_qubits > 6)
        throw std::invalid_argument("oracle_check: max_qubits must be <= 6");

    OracleCheckReport report;
    report.trials = trials;

    for (int t = 0; t < trials; ++t) {
        Rng rng(Rng::derive(seed, {0x04AC1Eu, static_cast<std::uint64_t>(t)}));
        const ProblemCase which = static_cast<ProblemCase>(t % 3);
        const WoodburyProblem p = random_problem(rng, max_qubits, max_rank, which);

        SolveConfig cfg;
        cfg.mode = EstimationMode::Exact;
        cfg.seed = Rng::derive(seed, {0x50BEu, static_cast<std::uint64_t>(t)});
        const SolveReport solved = solve_overlap(p, cfg);
        const Complex expected = dense_overlap_oracle(p);
        const double delta = std::abs(solved.overlap - expected);

        report.max_delta = std::max(report.max_delta, delta);
        switch (which) {
        case ProblemCase::Rank1: report.max_delta_rank1 = std::max(report.max_delta_rank1, delta); break;
        case ProblemCase::RankK: report.max_delta_rankk = std::max(report.max_delta_rankk, delta); break;
        case ProblemCase::UnitaryA:
            report.max_delta_unitary = std::max(report.max_delta_unitary, delta);
            break;
        }
    }
    return report;
}

} // namespace qwb
