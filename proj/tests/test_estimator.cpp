#include <doctest.h>

#include <atomic>
#include <cmath>

#include "qwb/estimator.hpp"
#include "qwb/experiment.hpp"
#include "qwb/rng.hpp"
#include "test_util.hpp"

using namespace qwb;

namespace {

EstimationContext exact_ctx() {
    EstimationContext ctx;
    ctx.mode = EstimationMode::Exact;
    return ctx;
}

} // namespace

TEST_SUITE("estimator") {

TEST_CASE("exact estimates of fixed overlaps") {
    const CircuitSpec uniform = uniform_preparer(3);
    const auto same =
        estimate_inner_product(uniform, uniform, OverlapMethod::Hadamard, true, exact_ctx());
    CHECK(same.value.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.std_error == 0.0);

    const CircuitSpec zero = CircuitSpec::empty(1);
    const CircuitSpec one{1, {Gate::x(0)}};
    const auto orth =
        estimate_inner_product(zero, one, OverlapMethod::Hadamard, false, exact_ctx());
    CHECK(std::abs(orth.value) < 1e-12);
}

TEST_CASE("exact estimates match statevector overlaps on random pairs") {
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.uniform_int(3));
        const CircuitSpec a = random_circuit(rng, n, 2 * n + 2, true);
        const CircuitSpec b = random_circuit(rng, n, 2 * n + 2, true);
        const Complex expected = inner(prepared_state(a), prepared_state(b));

        for (HadamardForm form : {HadamardForm::Prepared, HadamardForm::Compact}) {
            EstimationContext ctx = exact_ctx();
            ctx.form = form;
            const auto est = estimate_inner_product(a, b, OverlapMethod::Hadamard, false, ctx);
            CHECK(std::abs(est.value - expected) < 1e-10);
        }
    }
}

TEST_CASE("sampled estimate of a unit overlap stays within 0.01") {
    const CircuitSpec uniform = uniform_preparer(4);
    EstimationContext ctx;
    ctx.mode = EstimationMode::Sampled;
    ctx.shots = 100000;
    ctx.stream = 5;
    const auto est = estimate_inner_product(uniform, uniform, OverlapMethod::Hadamard, true, ctx);
    CHECK(std::abs(est.value.real() - 1.0) < 0.01);
    CHECK(est.shots_real == 100000);
    CHECK(est.shots_imag == 0);
}

TEST_CASE("sampled mode rejects zero shots") {
    const CircuitSpec uniform = uniform_preparer(2);
    EstimationContext ctx;
    ctx.mode = EstimationMode::Sampled;
    ctx.shots = 0;
    CHECK_THROWS_AS(
        estimate_inner_product(uniform, uniform, OverlapMethod::Hadamard, true, ctx),
        std::invalid_argument);
}

TEST_CASE("estimator consistency: error below 4 sigma in at least 95 of 100 runs") {
    // overlap <0|H|0> = 1/sqrt(2), real, so every method applies
    const CircuitSpec zero = CircuitSpec::empty(1);
    const CircuitSpec plus{1, {Gate::h(0)}};
    const double expected = 1.0 / std::sqrt(2.0);

    auto run = [&](OverlapMethod method, bool known_real, MitigationConfig mitigation) {
        int ok = 0;
        for (int s = 0; s < 100; ++s) {
            EstimationContext ctx;
            ctx.mode = EstimationMode::Sampled;
            ctx.shots = 4096;
            ctx.mitigation = mitigation;
            ctx.stream = Rng::derive(123, {static_cast<std::uint64_t>(s)});
            const auto est = estimate_inner_product(zero, plus, method, known_real, ctx);
            if (std::abs(est.value.real() - expected) < 4.0 * est.std_error &&
                std::abs(est.value.imag()) < 4.0 * std::max(est.std_error, 1e-12))
                ++ok;
        }
        return ok;
    };

    CHECK(run(OverlapMethod::Hadamard, true, MitigationConfig::none()) >= 95);
    CHECK(run(OverlapMethod::Hadamard, false, MitigationConfig::none()) >= 95);
    CHECK(run(OverlapMethod::Swap, true, MitigationConfig::none()) >= 95);
    const double identity_confusion[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    CHECK(run(OverlapMethod::Hadamard, true, MitigationConfig::mem(identity_confusion)) >= 95);
}

TEST_CASE("swap test requires a declared-real overlap and clamps at zero") {
    const CircuitSpec zero = CircuitSpec::empty(1);
    const CircuitSpec one{1, {Gate::x(0)}};
    CHECK_THROWS_AS(estimate_inner_product(zero, one, OverlapMethod::Swap, false, exact_ctx()),
                    std::invalid_argument);

    // orthogonal states: sampled |<a|b>|^2 estimates dip below zero half the
    // time, which must clamp rather than produce NaN
    bool saw_clamp = false;
    for (int s = 0; s < 20 && !saw_clamp; ++s) {
        EstimationContext ctx;
        ctx.mode = EstimationMode::Sampled;
        ctx.shots = 2048;
        ctx.stream = Rng::derive(321, {static_cast<std::uint64_t>(s)});
        const auto est = estimate_inner_product(zero, one, OverlapMethod::Swap, true, ctx);
        CHECK(est.value.real() >= 0.0);
        CHECK(std::isfinite(est.std_error));
        saw_clamp = saw_clamp || est.clamped;
    }
    CHECK(saw_clamp);
}

TEST_CASE("estimation counter counts one call per inner product") {
    std::atomic<long long> counter{0};
    EstimationContext ctx = exact_ctx();
    ctx.call_counter = &counter;
    const CircuitSpec uniform = uniform_preparer(2);
    estimate_inner_product(uniform, uniform, OverlapMethod::Hadamard, false, ctx);
    estimate_inner_product(uniform, uniform, OverlapMethod::Hadamard, true, ctx);
    CHECK(counter.load() == 2);
}

TEST_CASE("shot plan reproduces the closed-form counts") {
    const ShotPlan plan = shot_plan(0.01, Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0),
                                    Complex(1.0, 0.0), Complex(1.0, 0.0));
    CHECK(plan.n_zb == 10000);
    CHECK(plan.n_v0b == 2500);
    CHECK(plan.n_v0u0 == 625);
    CHECK(plan.n_zu0 == 2500);
}

TEST_CASE("shot plan with a zero update needs only the first overlap") {
    const ShotPlan plan = shot_plan(0.01, Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0),
                                    Complex(1.0, 0.0), Complex(1.0, 0.0));
    CHECK(plan.n_zb == 10000);
    CHECK(plan.n_v0b == 1);
    CHECK(plan.n_v0u0 == 1);
    CHECK(plan.n_zu0 == 1);
}

TEST_CASE("halving epsilon quadruples every count") {
    // epsilons chosen so the pre-ceiling counts are integers
    const Complex one(1.0, 0.0);
    const ShotPlan coarse = shot_plan(0.05, one, one, one, one, one);
    const ShotPlan fine = shot_plan(0.025, one, one, one, one, one);
    CHECK(fine.n_zb == 4 * coarse.n_zb);
    CHECK(fine.n_v0b == 4 * coarse.n_v0b);
    CHECK(fine.n_v0u0 == 4 * coarse.n_v0u0);
    CHECK(fine.n_zu0 == 4 * coarse.n_zu0);
}

TEST_CASE("shot plan rejects a resonant denominator") {
    CHECK_THROWS_AS(shot_plan(0.01, Complex(-1.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0),
                              Complex(1.0, 0.0), Complex(1.0, 0.0)),
                    NearSingularDenominator);
    CHECK_THROWS_AS(shot_plan(0.0, Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0),
                              Complex(1.0, 0.0), Complex(1.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("gamma on fixed inputs") {
    CHECK(std::abs(gamma(Complex(1.0, 0.0), Complex(1.0, 0.0)) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(gamma(Complex(0.0, 0.0), Complex(1.0, 0.0))) == 0.0);
    CHECK_THROWS_AS(gamma(Complex(-1.0, 0.0), Complex(1.0, 0.0)), NearSingularDenominator);
}

TEST_CASE("gamma magnitude tracks the inverse smallest eigenvalue") {
    // Hermitian instances I - t^2 u u^T: eigenvalues 1 and 1 - t^2, so
    // |gamma| * lambda_s approaches 1 as the conditioning blows up
    for (double t : {0.9, 0.99}) {
        const Complex a0b0(-t * t, 0.0);
        const Complex g = gamma(a0b0, Complex(1.0, 0.0));

        const std::size_t dim = 8;
        std::vector<double> u(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
        Matrix m = Matrix::identity(dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) m(r, c) += a0b0 * u[r] * u[c];
        const auto eigs = testutil::hermitian_eigenvalues(m);
        double lambda_s = std::abs(eigs[0]);
        for (double e : eigs) lambda_s = std::min(lambda_s, std::abs(e));

        const double ratio = std::abs(g) * lambda_s;
        CHECK(ratio == doctest::Approx(t * t).epsilon(1e-9));
    }
}

TEST_CASE("mem correction inverts the readout channel") {
    const double identity[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    const auto unchanged = mem_correct({0.7, 0.3}, identity);
    CHECK(unchanged[0] == doctest::Approx(0.7).epsilon(1e-14));

    const double skew[2][2] = {{0.9, 0.2}, {0.1, 0.8}};
    const auto corrected = mem_correct({0.9, 0.1}, skew);
    CHECK(corrected[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(corrected[1] == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(81);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = rng.uniform();
        const std::array<double, 2> truth = {p, 1.0 - p};
        const auto observed = apply_readout(truth, skew);
        const auto back = mem_correct(observed, skew);
        CHECK(std::abs(back[0] - truth[0]) < 1e-10);
        CHECK(std::abs(back[1] - truth[1]) < 1e-10);
    }

    const double singular[2][2] = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK_THROWS_AS(mem_correct({0.6, 0.4}, singular), std::invalid_argument);
}

TEST_CASE("zne extrapolation formula") {
    CHECK(zne_extrapolate(0.5, 0.5) == 0.5);
    CHECK(zne_extrapolate(0.45, 0.35) == doctest::Approx(0.5).epsilon(1e-15));

    // exactly linear decay in the noise level is recovered exactly
    Rng rng(91);
    for (int trial = 0; trial < 50; ++trial) {
        const double truth = rng.normal();
        const double slope = rng.normal();
        const double e1 = truth + slope;
        const double e3 = truth + 3.0 * slope;
        CHECK(std::abs(zne_extrapolate(e1, e3) - truth) < 1e-12);
    }
}

TEST_CASE("mitigation config validation") {
    MitigationConfig bad;
    bad.mode = MitigationMode::Mem;
    bad.confusion[0][0] = 0.5;
    bad.confusion[0][1] = 0.5;
    bad.confusion[1][0] = 0.5;
    bad.confusion[1][1] = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    MitigationConfig zne_one_level;
    zne_one_level.mode = MitigationMode::MemZne;
    zne_one_level.fold_levels = {0};
    CHECK_THROWS_AS(zne_one_level.validate(), std::invalid_argument);

    const double skew[2][2] = {{0.9, 0.2}, {0.1, 0.8}};
    CHECK_NOTHROW(MitigationConfig::mem(skew).validate());
    CHECK(MitigationConfig::mem_zne(skew).fold_levels == std::vector<int>{0, 1});
}

TEST_CASE("estimate invariant: magnitude bounded by 1 plus 5 std errors") {
    Rng rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.uniform_int(3));
        const CircuitSpec a = random_circuit(rng, n, 2 * n, true);
        const CircuitSpec b = random_circuit(rng, n, 2 * n, true);
        EstimationContext ctx;
        ctx.mode = EstimationMode::Sampled;
        ctx.shots = 2048;
        ctx.stream = Rng::derive(777, {static_cast<std::uint64_t>(trial)});
        const auto est = estimate_inner_product(a, b, OverlapMethod::Hadamard, false, ctx);
        CHECK(std::abs(est.value) <= 1.0 + 5.0 * est.std_error + 1e-12);
    }
}

} // TEST_SUITE
