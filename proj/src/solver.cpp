#include "qwb/solver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qwb/parallel.hpp"
#include "qwb/rng.hpp"

namespace qwb {

void LowRankFactors::validate() const {
    const std::size_t k = alphas.size();
    if (k == 0) throw std::invalid_argument("factors: rank must be >= 1");
    if (betas.size() != k || u_preparers.size() != k || v_preparers.size() != k)
        throw std::invalid_argument("factors: alpha/beta/preparer lengths must all equal the rank");
    if (c_matrix.rows() != k || c_matrix.cols() != k)
        throw std::invalid_argument("factors: C must be k x k");
    const std::uint32_t n = u_preparers[0].qubit_count;
    for (const auto& c : u_preparers)
        if (c.qubit_count != n) throw std::invalid_argument("factors: preparer widths differ");
    for (const auto& c : v_preparers)
        if (c.qubit_count != n) throw std::invalid_argument("factors: preparer widths differ");
}

void WoodburyProblem::validate() const {
    factors.validate();
    const std::uint32_t n = b_preparer.qubit_count;
    if (n == 0) throw std::invalid_argument("problem: empty register");
    if (z_preparer.qubit_count != n || factors.u_preparers[0].qubit_count != n)
        throw std::invalid_argument("problem: all circuits must share one qubit count");
    if (a_unitary && a_unitary->qubit_count != n)
        throw std::invalid_argument("problem: A circuit width differs from the register");
    b_preparer.validate();
    z_preparer.validate();
    if (a_unitary) a_unitary->validate();
    for (const auto& c : factors.u_preparers) c.validate();
    for (const auto& c : factors.v_preparers) c.validate();
}

void HermitianLCU::validate() const {
    if (gammas.empty() || gammas.size() != w_circuits.size())
        throw std::invalid_argument("observable: coefficient/circuit count mismatch");
    const std::uint32_t n = w_circuits[0].qubit_count;
    for (const auto& c : w_circuits)
        if (c.qubit_count != n) throw std::invalid_argument("observable: circuit widths differ");
}

namespace {

struct Task {
    std::string label;
    const CircuitSpec* bra = nullptr;
    const CircuitSpec* ket = nullptr;
    long shots = 0;
    const CircuitSpec* mid = nullptr;
    bool force_compact = false;
};

std::vector<InnerProductEstimate> run_tasks(const std::vector<Task>& tasks,
                                            const SolveConfig& cfg, bool known_real,
                                            int fold_level) {
    std::vector<InnerProductEstimate> out(tasks.size());
    auto run_one = [&](std::size_t i) {
        EstimationContext ctx;
        ctx.mode = cfg.mode;
        ctx.shots = tasks[i].shots;
        ctx.noise = cfg.noise;
        ctx.mitigation = cfg.mitigation;
        ctx.form = tasks[i].force_compact ? HadamardForm::Compact : cfg.form;
        ctx.fold_level = fold_level;
        // stream ids exclude the mitigation mode so that runs with the same
        // seed stay shot-for-shot paired across post-processing choices
        ctx.stream = Rng::derive(cfg.seed, {0xE571u, i, static_cast<std::uint64_t>(fold_level)});
        ctx.call_counter = cfg.call_counter;
        out[i] = estimate_inner_product(*tasks[i].bra, *tasks[i].ket, OverlapMethod::Hadamard,
                                        known_real, ctx, tasks[i].mid);
    };
    if (cfg.parallel) {
        parallel_for(tasks.size(), run_one);
    } else {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
    }
    return out;
}

struct Assembled {
    Complex value;
    double std_error;
    double capacitance_condition;
    Complex gamma;
};

void check_denominator(Complex denom, double propagated_std) {
    const double tol = std::max(1e-8, 10.0 * propagated_std);
    if (std::abs(denom) < tol) {
        std::ostringstream msg;
        msg << "estimated |1 + a<v0|u0>| = " << std::abs(denom)
            << " is below the meaningful-division tolerance " << tol;
        throw NearSingularDenominator(std::abs(denom), tol, msg.str());
    }
}

Assembled assemble_rank1(const WoodburyProblem& p, const std::vector<InnerProductEstimate>& e) {
    const Complex a0b0 = p.factors.alphas[0] * p.factors.betas[0];
    const Complex zb = e[0].value, v0b = e[1].value, v0u0 = e[2].value, zu0 = e[3].value;
    const Complex denom = Complex(1.0, 0.0) + a0b0 * v0u0;
    check_denominator(denom, std::abs(a0b0) * e[2].std_error);

    Assembled out;
    out.value = zb - a0b0 * v0b * zu0 / denom;
    out.gamma = a0b0 / denom;
    out.capacitance_condition = 1.0; // 1x1 capacitance matrix

    const double d = std::abs(denom);
    const double c_zb = 1.0;
    const double c_v0b = std::abs(a0b0 * zu0) / d;
    const double c_zu0 = std::abs(a0b0 * v0b) / d;
    const double c_v0u0 = std::abs(a0b0 * a0b0 * v0b * zu0) / (d * d);
    out.std_error = std::sqrt(std::pow(c_zb * e[0].std_error, 2) +
                              std::pow(c_v0b * e[1].std_error, 2) +
                              std::pow(c_v0u0 * e[2].std_error, 2) +
                              std::pow(c_zu0 * e[3].std_error, 2));
    return out;
}

Assembled assemble_rankk(const WoodburyProblem& p, const std::vector<InnerProductEstimate>& e) {
    const std::size_t k = p.factors.rank();
    const auto& alphas = p.factors.alphas;
    const auto& betas = p.factors.betas;

    // task order: zb | zu_i (k) | vb_j (k) | vu_(j,i) (k^2, j-major)
    const Complex y1 = e[0].value;
    std::vector<Complex> y2(k), y3(k);
    for (std::size_t i = 0; i < k; ++i) y2[i] = alphas[i] * e[1 + i].value;
    for (std::size_t j = 0; j < k; ++j) y3[j] = betas[j] * e[1 + k + j].value;

    Matrix capacitance = invert(p.factors.c_matrix, SingularMatrixError::Part::C);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i)
            capacitance(j, i) += alphas[i] * betas[j] * e[1 + 2 * k + j * k + i].value;

    double cond = 1.0;
    Matrix m = invert(capacitance, SingularMatrixError::Part::Capacitance, &cond);

    // row_i = (M y3)_i and col_j = (y2^T M)_j double as sensitivity weights
    std::vector<Complex> m_y3(k, Complex(0.0, 0.0)), y2_m(k, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            m_y3[i] += m(i, j) * y3[j];
            y2_m[j] += y2[i] * m(i, j);
        }

    Complex correction(0.0, 0.0);
    for (std::size_t i = 0; i < k; ++i) correction += y2[i] * m_y3[i];

    Assembled out;
    out.value = y1 - correction;
    out.capacitance_condition = cond;
    out.gamma = Complex(0.0, 0.0);
    if (k == 1) {
        const Complex a0b0 = alphas[0] * betas[0];
        const Complex denom = Complex(1.0, 0.0) + a0b0 * e[3].value * p.factors.c_matrix(0, 0);
        if (std::abs(denom) > 1e-12) out.gamma = a0b0 / denom;
    }

    double var = std::pow(e[0].std_error, 2);
    for (std::size_t i = 0; i < k; ++i)
        var += std::pow(std::abs(alphas[i] * m_y3[i]) * e[1 + i].std_error, 2);
    for (std::size_t j = 0; j < k; ++j)
        var += std::pow(std::abs(betas[j] * y2_m[j]) * e[1 + k + j].std_error, 2);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) {
            const double coef = std::abs(alphas[i] * betas[j] * y2_m[j] * m_y3[i]);
            var += std::pow(coef * e[1 + 2 * k + j * k + i].std_error, 2);
        }
    out.std_error = std::sqrt(var);
    return out;
}

SolveReport finalize(const WoodburyProblem& p, const SolveConfig& cfg,
                     const std::vector<Task>& tasks, bool rank1_shape) {
    cfg.mitigation.validate();
    const std::vector<int>& levels = cfg.mitigation.fold_levels;

    SolveReport report;
    std::vector<Assembled> assembled;
    for (int level : levels) {
        std::vector<InnerProductEstimate> estimates =
            run_tasks(tasks, cfg, p.declared_real, level);
        Assembled a = rank1_shape ? assemble_rank1(p, estimates) : assemble_rankk(p, estimates);
        if (assembled.empty()) {
            report.per_inner_product.reserve(tasks.size());
            for (std::size_t i = 0; i < tasks.size(); ++i)
                report.per_inner_product.push_back({tasks[i].label, estimates[i]});
            report.capacitance_condition = a.capacitance_condition;
            report.gamma = a.gamma;
        }
        report.fold_level_values.push_back(a.value.real());
        assembled.push_back(a);
    }

    if (assembled.size() == 2) {
        report.overlap = Complex(
            zne_extrapolate(report.fold_level_values[0], report.fold_level_values[1]),
            zne_extrapolate(assembled[0].value.imag(), assembled[1].value.imag()));
        report.overlap_std_error = std::hypot(1.5 * assembled[0].std_error,
                                              0.5 * assembled[1].std_error);
    } else {
        report.overlap = assembled[0].value;
        report.overlap_std_error = assembled[0].std_error;
    }
    return report;
}

long task_shots(const SolveConfig& cfg, long planned) {
    if (cfg.mode == EstimationMode::Exact) return 0;
    return planned > 0 ? planned : cfg.shots;
}

} // namespace

SolveReport solve_rank1_overlap(const WoodburyProblem& p, const SolveConfig& cfg) {
    p.validate();
    if (p.factors.rank() != 1)
        throw std::invalid_argument("solve_rank1_overlap: rank must be 1");
    if (!p.a_is_identity())
        throw std::invalid_argument("solve_rank1_overlap: A must be the identity");
    if (std::abs(p.factors.c_matrix(0, 0) - Complex(1.0, 0.0)) > 1e-12)
        throw std::invalid_argument(
            "solve_rank1_overlap: requires C = [1]; use the rank-k solver for general C");

    const CircuitSpec& z = p.z_preparer;
    const CircuitSpec& b = p.b_preparer;
    const CircuitSpec& u0 = p.factors.u_preparers[0];
    const CircuitSpec& v0 = p.factors.v_preparers[0];

    long s_zb = cfg.shots, s_v0b = cfg.shots, s_v0u0 = cfg.shots, s_zu0 = cfg.shots;
    if (cfg.plan) {
        s_zb = cfg.plan->n_zb;
        s_v0b = cfg.plan->n_v0b;
        s_v0u0 = cfg.plan->n_v0u0;
        s_zu0 = cfg.plan->n_zu0;
    }

    std::vector<Task> tasks = {
        {"z|b", &z, &b, task_shots(cfg, s_zb)},
        {"v0|b", &v0, &b, task_shots(cfg, s_v0b)},
        {"v0|u0", &v0, &u0, task_shots(cfg, s_v0u0)},
        {"z|u0", &z, &u0, task_shots(cfg, s_zu0)},
    };
    return finalize(p, cfg, tasks, /*rank1_shape=*/true);
}

namespace {

SolveReport solve_rankk_impl(const WoodburyProblem& p, const SolveConfig& cfg,
                             const CircuitSpec* mid) {
    p.validate();
    const std::size_t k = p.factors.rank();
    const CircuitSpec& z = p.z_preparer;
    const CircuitSpec& b = p.b_preparer;
    const long shots = task_shots(cfg, 0);

    std::vector<Task> tasks;
    tasks.reserve(k * k + 2 * k + 1);
    tasks.push_back({"z|b", &z, &b, shots, mid});
    for (std::size_t i = 0; i < k; ++i)
        tasks.push_back({"z|u" + std::to_string(i), &z, &p.factors.u_preparers[i], shots, mid});
    for (std::size_t j = 0; j < k; ++j)
        tasks.push_back({"v" + std::to_string(j) + "|b", &p.factors.v_preparers[j], &b, shots, mid});
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i)
            tasks.push_back({"v" + std::to_string(j) + "|u" + std::to_string(i),
                             &p.factors.v_preparers[j], &p.factors.u_preparers[i], shots, mid});
    return finalize(p, cfg, tasks, /*rank1_shape=*/false);
}

} // namespace

SolveReport solve_rankk_overlap(const WoodburyProblem& p, const SolveConfig& cfg) {
    if (!p.a_is_identity())
        throw std::invalid_argument("solve_rankk_overlap: A must be the identity");
    return solve_rankk_impl(p, cfg, nullptr);
}

SolveReport solve_unitary_a_overlap(const WoodburyProblem& p, const SolveConfig& cfg) {
    if (p.a_is_identity())
        throw std::invalid_argument("solve_unitary_a_overlap: problem has no A circuit");
    const CircuitSpec q_dagger = inverse(*p.a_unitary);
    return solve_rankk_impl(p, cfg, &q_dagger);
}

SolveReport solve_overlap(const WoodburyProblem& p, const SolveConfig& cfg) {
    if (!p.a_is_identity()) return solve_unitary_a_overlap(p, cfg);
    if (p.factors.rank() == 1 &&
        std::abs(p.factors.c_matrix(0, 0) - Complex(1.0, 0.0)) <= 1e-12)
        return solve_rank1_overlap(p, cfg);
    return solve_rankk_overlap(p, cfg);
}

HermitianExpectation expectation_hermitian(const WoodburyProblem& p, const HermitianLCU& o,
                                           const SolveConfig& cfg) {
    p.validate();
    o.validate();
    if (p.factors.rank() != 1 || !p.a_is_identity())
        throw std::invalid_argument("expectation_hermitian: rank-1 identity-A problems only");
    if (o.w_circuits[0].qubit_count != p.qubit_count())
        throw std::invalid_argument("expectation_hermitian: observable width differs");

    // Hermiticity is checked by materializing the matrix at desk scale.
    if (p.qubit_count() <= 6) {
        const std::size_t dim = std::size_t(1) << p.qubit_count();
        Matrix sum(dim, dim);
        for (std::size_t t = 0; t < o.gammas.size(); ++t) {
            Matrix w = circuit_unitary(o.w_circuits[t]);
            w *= o.gammas[t];
            sum += w;
        }
        double worst = 0.0;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c)
                worst = std::max(worst, std::abs(sum(r, c) - std::conj(sum(c, r))));
        if (worst > 1e-8)
            throw std::invalid_argument("expectation_hermitian: observable is not Hermitian");
    }

    const std::size_t m = o.gammas.size();
    const CircuitSpec& b = p.b_preparer;
    const CircuitSpec& u0 = p.factors.u_preparers[0];
    const CircuitSpec& v0 = p.factors.v_preparers[0];
    const long shots = task_shots(cfg, 0);

    std::vector<Task> tasks;
    tasks.reserve(2 + 3 * m);
    tasks.push_back({"v0|b", &v0, &b, shots});
    tasks.push_back({"v0|u0", &v0, &u0, shots});
    for (std::size_t t = 0; t < m; ++t)
        tasks.push_back({"b|W" + std::to_string(t) + "|b", &b, &b, shots, &o.w_circuits[t]});
    for (std::size_t t = 0; t < m; ++t)
        tasks.push_back({"u0|W" + std::to_string(t) + "|u0", &u0, &u0, shots, &o.w_circuits[t]});
    for (std::size_t t = 0; t < m; ++t)
        tasks.push_back({"b|W" + std::to_string(t) + "|u0", &b, &u0, shots, &o.w_circuits[t],
                         /*force_compact=*/true});

    // the diagonal <psi|W|psi> terms are complex even for real-valued
    // problems, so only the two c-factor overlaps honor declared_real
    std::vector<InnerProductEstimate> efactors(2);
    std::vector<InnerProductEstimate> eterms(3 * m);
    {
        std::vector<Task> factor_tasks(tasks.begin(), tasks.begin() + 2);
        std::vector<Task> term_tasks(tasks.begin() + 2, tasks.end());
        efactors = run_tasks(factor_tasks, cfg, p.declared_real, 0);
        eterms = run_tasks(term_tasks, cfg, false, 0);
    }

    const Complex a0b0 = p.factors.alphas[0] * p.factors.betas[0];
    const Complex v0b = efactors[0].value;
    const Complex v0u0 = efactors[1].value;
    const Complex denom = Complex(1.0, 0.0) + a0b0 * v0u0;
    check_denominator(denom, std::abs(a0b0) * efactors[1].std_error);
    const Complex c = a0b0 * v0b / denom;

    Complex obb(0.0, 0.0), ouu(0.0, 0.0), obu(0.0, 0.0);
    double var_obb = 0.0, var_ouu = 0.0, var_obu = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        obb += o.gammas[t] * eterms[t].value;
        ouu += o.gammas[t] * eterms[m + t].value;
        obu += o.gammas[t] * eterms[2 * m + t].value;
        var_obb += std::pow(std::abs(o.gammas[t]) * eterms[t].std_error, 2);
        var_ouu += std::pow(std::abs(o.gammas[t]) * eterms[m + t].std_error, 2);
        var_obu += std::pow(std::abs(o.gammas[t]) * eterms[2 * m + t].std_error, 2);
    }

    const double c2 = std::norm(c);
    const Complex x = obb + c2 * ouu - 2.0 * (c * obu).real();

    HermitianExpectation result;
    result.value = x.real();
    result.imag_residue = std::abs(x.imag());

    // first-order error, including the sensitivity of c to its two overlaps
    const double dc =
        std::abs(a0b0 / denom) * efactors[0].std_error +
        std::abs(a0b0 * a0b0 * v0b / (denom * denom)) * efactors[1].std_error;
    const double dx_dc = 2.0 * std::abs(obu) + 2.0 * std::abs(c) * std::abs(ouu);
    result.std_error = std::sqrt(var_obb + c2 * c2 * var_ouu +
                                 std::pow(2.0 * std::abs(c), 2) * var_obu +
                                 std::pow(dx_dc * dc, 2));

    if (result.imag_residue > std::max(1e-9, 5.0 * result.std_error))
        throw std::runtime_error(
            "expectation_hermitian: imaginary residue exceeds 5x the standard error");

    result.terms.reserve(tasks.size());
    result.terms.push_back({tasks[0].label, efactors[0]});
    result.terms.push_back({tasks[1].label, efactors[1]});
    for (std::size_t t = 0; t < eterms.size(); ++t)
        result.terms.push_back({tasks[2 + t].label, eterms[t]});
    return result;
}

} // namespace qwb
