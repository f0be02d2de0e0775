#include "qwb/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "qwb/rng.hpp"

namespace qwb {

namespace {

long ceil_count(double x) {
    // tolerate FP dust below 1e-9 before rounding up
    double c = std::ceil(x - 1e-9);
    if (c < 1.0) c = 1.0;
    return static_cast<long>(c);
}

} // namespace

ShotPlan shot_plan(double epsilon, Complex alpha0beta0, Complex zb, Complex v0b, Complex v0u0,
                   Complex zu0) {
    (void)zb; // the <z|b> count depends only on epsilon
    if (!(epsilon > 0.0)) throw std::invalid_argument("shot_plan: epsilon must be positive");
    const Complex denom_c = Complex(1.0, 0.0) + alpha0beta0 * v0u0;
    const double denom = std::abs(denom_c);
    if (denom < 1e-12)
        throw NearSingularDenominator(denom, 1e-12,
                                      "shot_plan: resonant denominator |1 + a<v0|u0>| < 1e-12");

    const double ab = std::abs(alpha0beta0);
    const double m_v0b = std::abs(v0b);
    const double m_zu0 = std::abs(zu0);

    ShotPlan plan;
    plan.n_zb = ceil_count(std::pow(1.0 / epsilon, 2.0));
    plan.n_v0b = ceil_count(std::pow(ab * m_zu0 / (epsilon * denom), 2.0));
    plan.n_v0u0 = ceil_count(std::pow(ab * ab * m_zu0 * m_v0b / (epsilon * denom * denom), 2.0));
    plan.n_zu0 = ceil_count(std::pow(ab * m_v0b / (epsilon * denom), 2.0));
    return plan;
}

Complex gamma(Complex alpha0beta0, Complex v0u0) {
    const Complex denom = Complex(1.0, 0.0) + alpha0beta0 * v0u0;
    if (std::abs(denom) < 1e-12)
        throw NearSingularDenominator(std::abs(denom), 1e-12,
                                      "gamma: denominator 1 + a<v0|u0> is zero");
    return alpha0beta0 / denom;
}

const char* mitigation_name(MitigationMode m) {
    switch (m) {
    case MitigationMode::None: return "none";
    case MitigationMode::Mem: return "mem";
    case MitigationMode::MemZne: return "mem_zne";
    }
    return "none";
}

MitigationMode mitigation_from_name(const std::string& name) {
    if (name == "none") return MitigationMode::None;
    if (name == "mem") return MitigationMode::Mem;
    if (name == "mem_zne" || name == "mem+zne") return MitigationMode::MemZne;
    throw std::invalid_argument("unknown mitigation mode: " + name);
}

MitigationConfig MitigationConfig::none() { return MitigationConfig{}; }

MitigationConfig MitigationConfig::mem(const double calibrated[2][2]) {
    MitigationConfig cfg;
    cfg.mode = MitigationMode::Mem;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) cfg.confusion[i][j] = calibrated[i][j];
    cfg.fold_levels = {0};
    return cfg;
}

MitigationConfig MitigationConfig::mem_zne(const double calibrated[2][2]) {
    MitigationConfig cfg = mem(calibrated);
    cfg.mode = MitigationMode::MemZne;
    cfg.fold_levels = {0, 1};
    return cfg;
}

void MitigationConfig::validate() const {
    if (fold_levels.empty()) throw std::invalid_argument("mitigation: fold_levels empty");
    for (int f : fold_levels)
        if (f < 0) throw std::invalid_argument("mitigation: negative fold level");
    if (mode == MitigationMode::MemZne && fold_levels.size() != 2)
        throw std::invalid_argument("mitigation: mem_zne needs exactly two fold levels");
    if (applies_mem()) {
        const double det = confusion[0][0] * confusion[1][1] - confusion[0][1] * confusion[1][0];
        if (std::abs(det) < 1e-12)
            throw std::invalid_argument("mitigation: confusion matrix is not invertible");
    }
}

std::array<double, 2> apply_readout(const std::array<double, 2>& p_true,
                                    const double confusion[2][2]) {
    return {confusion[0][0] * p_true[0] + confusion[0][1] * p_true[1],
            confusion[1][0] * p_true[0] + confusion[1][1] * p_true[1]};
}

std::array<double, 2> mem_correct(const std::array<double, 2>& observed,
                                  const double confusion[2][2]) {
    const double det = confusion[0][0] * confusion[1][1] - confusion[0][1] * confusion[1][0];
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("mem_correct: confusion matrix is singular");
    double t0 = (confusion[1][1] * observed[0] - confusion[0][1] * observed[1]) / det;
    double t1 = (-confusion[1][0] * observed[0] + confusion[0][0] * observed[1]) / det;
    t0 = std::min(std::max(t0, 0.0), 1.0);
    t1 = std::min(std::max(t1, 0.0), 1.0);
    const double sum = t0 + t1;
    if (sum <= 0.0) return {0.5, 0.5};
    return {t0 / sum, t1 / sum};
}

double zne_extrapolate(double e1, double e3) { return e1 + (e1 - e3) / 2.0; }

namespace {

struct StatisticResult {
    double value = 0.0;
    double std_error = 0.0;
};

/// Runs one interference circuit: exact amplitudes or finite shots with the
/// noise model and MEM correction, returning the ancilla statistic
/// P(0) - P(1) and its binomial standard error.
StatisticResult measure_statistic(const CircuitSpec& test_circuit, const EstimationContext& ctx,
                                  std::uint64_t substream) {
    StatisticResult out;
    if (ctx.mode == EstimationMode::Exact) {
        // exact mode bypasses noise, so there is nothing to mitigate
        out.value = exact_ancilla_statistic(test_circuit);
        return out;
    }
    if (ctx.shots < 1) throw std::invalid_argument("estimate: shots must be >= 1 in sampled mode");

    const CircuitSpec folded = fold(test_circuit, ctx.fold_level);
    const ShotResult res = sample(folded, ctx.shots, ctx.noise, substream);
    const double raw0 = res.frequency("0");

    double f0 = raw0;
    double f1 = 1.0 - raw0;
    double slope = 2.0; // d(P0 - P1)/d(raw0) without correction
    if (ctx.mitigation.applies_mem()) {
        const auto corrected = mem_correct({f0, f1}, ctx.mitigation.confusion);
        f0 = corrected[0];
        f1 = corrected[1];
        const double(&c)[2][2] = ctx.mitigation.confusion;
        const double det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        // the corrected statistic is affine in raw0 away from the clip bounds
        slope = (c[1][1] + c[0][1] + c[1][0] + c[0][0]) / det;
    }
    out.value = f0 - f1;
    out.std_error =
        std::abs(slope) * std::sqrt(raw0 * (1.0 - raw0) / static_cast<double>(ctx.shots));
    return out;
}

CircuitSpec build_w_circuit(const CircuitSpec& bra_prep, const CircuitSpec& ket_prep,
                            const CircuitSpec* mid, HadamardForm form, bool expectation_shape) {
    if (expectation_shape) {
        // <psi|W|psi>: prep carries |psi>, only W is controlled
        return *mid;
    }
    if (form == HadamardForm::Prepared) {
        CircuitSpec w = concat(inverse(bra_prep), ket_prep);
        if (mid) w = concat(w, *mid);
        return w;
    }
    CircuitSpec w = ket_prep;
    if (mid) w = concat(w, *mid);
    return concat(w, inverse(bra_prep));
}

} // namespace

InnerProductEstimate estimate_inner_product(const CircuitSpec& bra_prep,
                                            const CircuitSpec& ket_prep, OverlapMethod method,
                                            bool known_real, const EstimationContext& ctx,
                                            const CircuitSpec* mid) {
    if (bra_prep.qubit_count != ket_prep.qubit_count)
        throw std::invalid_argument("estimate: preparer qubit counts differ");
    if (mid && mid->qubit_count != bra_prep.qubit_count)
        throw std::invalid_argument("estimate: mid-operator qubit count differs");
    ctx.mitigation.validate();
    if (ctx.call_counter) ctx.call_counter->fetch_add(1);

    InnerProductEstimate est;

    if (method == OverlapMethod::Swap) {
        if (!known_real)
            throw std::invalid_argument(
                "estimate: the swap test applies only to overlaps declared real nonnegative");
        if (mid)
            throw std::invalid_argument("estimate: the swap test cannot interpose an operator");
        const CircuitSpec circuit = swap_test(bra_prep, ket_prep);
        const StatisticResult stat = measure_statistic(circuit, ctx, Rng::mix(ctx.stream, 1));
        // statistic = 2 P(0) - 1 = |<a|b>|^2
        const double m = stat.value;
        est.clamped = m < 0.0;
        const double mag2 = std::max(m, 0.0);
        est.value = Complex(std::sqrt(mag2), 0.0);
        est.shots_real = ctx.mode == EstimationMode::Sampled ? ctx.shots : 0;
        if (ctx.mode == EstimationMode::Sampled) {
            const double v = est.value.real();
            est.std_error = v > 1e-6 ? stat.std_error / (2.0 * v) : std::sqrt(stat.std_error);
        }
        return est;
    }

    const bool expectation_shape = mid != nullptr && bra_prep == ket_prep;
    const CircuitSpec w = build_w_circuit(bra_prep, ket_prep, mid, ctx.form, expectation_shape);
    const bool prep_is_bra = expectation_shape || ctx.form == HadamardForm::Prepared;
    const CircuitSpec prep_empty = CircuitSpec::empty(bra_prep.qubit_count);
    const CircuitSpec& prep_used = prep_is_bra ? bra_prep : prep_empty;

    const CircuitSpec real_circuit = hadamard_test(prep_used, w, Part::Real);
    const StatisticResult re = measure_statistic(real_circuit, ctx, Rng::mix(ctx.stream, 1));
    est.shots_real = ctx.mode == EstimationMode::Sampled ? ctx.shots : 0;

    if (known_real) {
        est.value = Complex(re.value, 0.0);
        est.std_error = re.std_error;
        return est;
    }

    const CircuitSpec imag_circuit = hadamard_test(prep_used, w, Part::Imag);
    const StatisticResult im = measure_statistic(imag_circuit, ctx, Rng::mix(ctx.stream, 2));
    est.shots_imag = ctx.mode == EstimationMode::Sampled ? ctx.shots : 0;
    est.value = Complex(re.value, im.value);
    est.std_error = std::hypot(re.std_error, im.std_error);
    return est;
}

} // namespace qwb
