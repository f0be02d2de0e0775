#include <doctest.h>

#include <atomic>
#include <cmath>

#include "qwb/experiment.hpp"
#include "qwb/rng.hpp"
#include "qwb/solver.hpp"
#include "test_util.hpp"

using namespace qwb;

namespace {

SolveConfig exact_cfg(std::uint64_t seed = 1) {
    SolveConfig cfg;
    cfg.mode = EstimationMode::Exact;
    cfg.seed = seed;
    return cfg;
}

Mat2 pauli_by_index(int idx) {
    switch (idx) {
    case 1: return mat2_x();
    case 2: return mat2_y();
    case 3: return mat2_z();
    default: return Mat2{{Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0)}};
    }
}

/// Random Hermitian 2-qubit Pauli sum plus its dense matrix built by an
/// independent kron route.
struct PauliSum {
    HermitianLCU lcu;
    Matrix dense;
};

PauliSum random_pauli_sum(Rng& rng, int terms) {
    PauliSum out;
    out.dense = Matrix(4, 4);
    for (int t = 0; t < terms; ++t) {
        const int pa = static_cast<int>(rng.uniform_int(4));
        const int pb = static_cast<int>(rng.uniform_int(4));
        const double coeff = rng.normal();

        CircuitSpec w = CircuitSpec::empty(2);
        if (pa != 0) w.gates.push_back(Gate::u1q(0, pauli_by_index(pa)));
        if (pb != 0) w.gates.push_back(Gate::u1q(1, pauli_by_index(pb)));
        out.lcu.gammas.push_back(Complex(coeff, 0.0));
        out.lcu.w_circuits.push_back(std::move(w));

        const Mat2 ma = pauli_by_index(pa);
        const Mat2 mb = pauli_by_index(pb);
        // qubit 0 is the low bit: index = 2*b1 + b0, kron(mb, ma)
        for (int r1 = 0; r1 < 2; ++r1)
            for (int r0 = 0; r0 < 2; ++r0)
                for (int c1 = 0; c1 < 2; ++c1)
                    for (int c0 = 0; c0 < 2; ++c0)
                        out.dense(2 * r1 + r0, 2 * c1 + c0) +=
                            coeff * mb(r1, c1) * ma(r0, c0);
    }
    return out;
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("uniform instance solves to one half at every size") {
    for (std::uint32_t n : {1u, 2u, 5u, 10u, 16u, 20u, 26u}) {
        const SolveReport report = solve_rank1_overlap(uniform_rank1_instance(n), exact_cfg());
        CHECK(std::abs(report.overlap - Complex(0.5, 0.0)) < 1e-10);
        CHECK(std::abs(report.gamma - Complex(0.5, 0.0)) < 1e-10);
        CHECK(report.per_inner_product.size() == 4);
    }
}

TEST_CASE("zero update leaves the overlap at <z|b>") {
    WoodburyProblem p = uniform_rank1_instance(3);
    p.factors.alphas[0] = Complex(0.0, 0.0);
    const SolveReport report = solve_rank1_overlap(p, exact_cfg());
    CHECK(std::abs(report.overlap - Complex(1.0, 0.0)) < 1e-12); // <z|b> = 1 here
}

TEST_CASE("rank-1 solve matches the dense oracle on random instances") {
    Rng rng(201);
    for (int trial = 0; trial < 10; ++trial) {
        const WoodburyProblem p = random_problem(rng, 3, 1, ProblemCase::Rank1);
        const SolveReport report = solve_rank1_overlap(p, exact_cfg());
        const Complex expected = dense_overlap_oracle(p);
        CHECK(std::abs(report.overlap - expected) < 1e-10);
    }
}

TEST_CASE("rank-1 solver rejects problems it does not cover") {
    WoodburyProblem p = uniform_rank1_instance(2);
    p.factors.c_matrix(0, 0) = Complex(2.0, 0.0);
    CHECK_THROWS_AS(solve_rank1_overlap(p, exact_cfg()), std::invalid_argument);

    WoodburyProblem q = uniform_rank1_instance(2);
    q.a_unitary = CircuitSpec::empty(2);
    CHECK_THROWS_AS(solve_rank1_overlap(q, exact_cfg()), std::invalid_argument);
}

TEST_CASE("near-singular denominator is rejected with a distinct error") {
    // u0 = v0 uniform and alpha0 beta0 = -1 makes 1 + a<v0|u0> = 0
    WoodburyProblem p = uniform_rank1_instance(2);
    p.factors.alphas[0] = Complex(-1.0, 0.0);
    CHECK_THROWS_AS(solve_rank1_overlap(p, exact_cfg()), NearSingularDenominator);
}

TEST_CASE("rank-k path at k = 1 reduces to the rank-1 formula") {
    Rng rng(211);
    for (int trial = 0; trial < 6; ++trial) {
        const WoodburyProblem p = random_problem(rng, 3, 1, ProblemCase::Rank1);
        const SolveReport r1 = solve_rank1_overlap(p, exact_cfg());
        const SolveReport rk = solve_rankk_overlap(p, exact_cfg());
        CHECK(std::abs(r1.overlap - rk.overlap) < 1e-11);
    }
}

TEST_CASE("rank-k with zero coefficients returns <z|b>") {
    Rng rng(221);
    WoodburyProblem p = random_problem(rng, 3, 3, ProblemCase::RankK);
    for (auto& a : p.factors.alphas) a = Complex(0.0, 0.0);
    for (auto& b : p.factors.betas) b = Complex(0.0, 0.0);
    p.factors.c_matrix = Matrix::identity(p.factors.rank());
    const SolveReport report = solve_rankk_overlap(p, exact_cfg());
    const Complex zb = inner(prepared_state(p.z_preparer), prepared_state(p.b_preparer));
    CHECK(std::abs(report.overlap - zb) < 1e-11);
}

TEST_CASE("rank-k solve matches the dense oracle") {
    Rng rng(231);
    for (int trial = 0; trial < 8; ++trial) {
        const WoodburyProblem p = random_problem(rng, 4, 3, ProblemCase::RankK);
        const SolveReport report = solve_rankk_overlap(p, exact_cfg());
        const Complex expected = dense_overlap_oracle(p);
        CHECK(std::abs(report.overlap - expected) < 1e-9);
        CHECK(report.per_inner_product.size() ==
              p.factors.rank() * p.factors.rank() + 2 * p.factors.rank() + 1);
        CHECK(report.capacitance_condition >= 1.0);
    }
}

TEST_CASE("declared-real problems use one circuit family per overlap") {
    // real-declared: only the real-part circuit runs; general complex
    // problems sample the imaginary-part circuit as well
    WoodburyProblem p = uniform_rank1_instance(3);
    SolveConfig cfg;
    cfg.mode = EstimationMode::Sampled;
    cfg.shots = 64;
    cfg.seed = 99;

    const SolveReport real_run = solve_rank1_overlap(p, cfg);
    for (const auto& e : real_run.per_inner_product) {
        CHECK(e.estimate.shots_real == 64);
        CHECK(e.estimate.shots_imag == 0);
    }

    p.declared_real = false;
    const SolveReport complex_run = solve_rank1_overlap(p, cfg);
    for (const auto& e : complex_run.per_inner_product) {
        CHECK(e.estimate.shots_real == 64);
        CHECK(e.estimate.shots_imag == 64);
    }
}

TEST_CASE("unitary-A solve with an identity circuit equals the rank-k result") {
    Rng rng(241);
    WoodburyProblem p = random_problem(rng, 3, 2, ProblemCase::RankK);
    WoodburyProblem q = p;
    q.a_unitary = CircuitSpec::empty(p.qubit_count());
    const SolveReport via_rankk = solve_rankk_overlap(p, exact_cfg());
    const SolveReport via_unitary = solve_unitary_a_overlap(q, exact_cfg());
    CHECK(std::abs(via_rankk.overlap - via_unitary.overlap) < 1e-10);
}

TEST_CASE("unitary-A solve on the X-layer instance keeps the half overlap") {
    // the uniform state is invariant under X on every qubit
    WoodburyProblem p = uniform_rank1_instance(3);
    CircuitSpec x_layer = CircuitSpec::empty(3);
    for (std::uint32_t q = 0; q < 3; ++q) x_layer.gates.push_back(Gate::x(q));
    p.a_unitary = x_layer;
    const SolveReport report = solve_unitary_a_overlap(p, exact_cfg());
    CHECK(std::abs(report.overlap - Complex(0.5, 0.0)) < 1e-10);
}

TEST_CASE("unitary-A solve matches the dense oracle") {
    Rng rng(251);
    for (int trial = 0; trial < 8; ++trial) {
        const WoodburyProblem p = random_problem(rng, 3, 2, ProblemCase::UnitaryA);
        const SolveReport report = solve_unitary_a_overlap(p, exact_cfg());
        const Complex expected = dense_overlap_oracle(p);
        CHECK(std::abs(report.overlap - expected) < 1e-9);
    }
}

TEST_CASE("estimation counts are exactly k^2 + 2k + 1") {
    Rng rng(261);
    for (std::uint32_t k = 1; k <= 4; ++k) {
        WoodburyProblem p = random_problem(rng, 2, 1, ProblemCase::Rank1);
        // widen to rank k with repeated preparers and fresh coefficients
        while (p.factors.rank() < k) {
            p.factors.alphas.push_back(Complex(0.1, 0.05));
            p.factors.betas.push_back(Complex(0.1, -0.05));
            p.factors.u_preparers.push_back(p.factors.u_preparers[0]);
            p.factors.v_preparers.push_back(p.factors.v_preparers[0]);
        }
        p.factors.c_matrix = Matrix::identity(k);

        std::atomic<long long> counter{0};
        SolveConfig cfg = exact_cfg();
        cfg.call_counter = &counter;
        solve_rankk_overlap(p, cfg);
        CHECK(counter.load() == static_cast<long long>(k * k + 2 * k + 1));
    }

    std::atomic<long long> counter{0};
    SolveConfig cfg = exact_cfg();
    cfg.call_counter = &counter;
    solve_rank1_overlap(uniform_rank1_instance(2), cfg);
    CHECK(counter.load() == 4);
}

TEST_CASE("overlap is invariant under (t alpha, beta / t) rescaling") {
    Rng rng(271);
    const WoodburyProblem base = random_problem(rng, 3, 1, ProblemCase::Rank1);
    const Complex reference = solve_rank1_overlap(base, exact_cfg()).overlap;
    for (double t : {0.25, 2.0, -3.0}) {
        WoodburyProblem scaled = base;
        scaled.factors.alphas[0] *= t;
        scaled.factors.betas[0] /= t;
        const Complex overlap = solve_rank1_overlap(scaled, exact_cfg()).overlap;
        CHECK(std::abs(overlap - reference) < 1e-10);
    }
}

TEST_CASE("zne pipeline equals the extrapolation of the two fold-level pipelines") {
    NoiseModel noise;
    noise.p1 = 0.004;
    noise.p2 = 0.004;
    noise.readout[0][0] = 0.97;
    noise.readout[1][0] = 0.03;
    noise.readout[0][1] = 0.04;
    noise.readout[1][1] = 0.96;

    SolveConfig cfg;
    cfg.mode = EstimationMode::Sampled;
    cfg.shots = 4000;
    cfg.noise = noise;
    cfg.mitigation = MitigationConfig::mem_zne(noise.readout);
    cfg.seed = 5150;

    const WoodburyProblem p = uniform_rank1_instance(4);
    const SolveReport report = solve_rank1_overlap(p, cfg);
    REQUIRE(report.fold_level_values.size() == 2);
    CHECK(report.overlap.real() ==
          zne_extrapolate(report.fold_level_values[0], report.fold_level_values[1]));

    // each fold level rerun on its own reproduces the recorded value exactly
    for (int level = 0; level < 2; ++level) {
        SolveConfig single = cfg;
        single.mitigation = MitigationConfig::mem(noise.readout);
        single.mitigation.fold_levels = {level};
        const SolveReport one = solve_rank1_overlap(p, single);
        CHECK(one.overlap.real() == report.fold_level_values[level]);
    }
}

TEST_CASE("sampled error decays like one over root shots") {
    const std::uint32_t n = 3;
    const WoodburyProblem p = testutil::lopsided_rank1_instance(n);
    const double exact = testutil::lopsided_rank1_exact(n);

    std::vector<double> log_shots, log_rms;
    for (long shots : {100L, 1000L, 10000L, 100000L}) {
        double sq = 0.0;
        const int seeds = 30;
        for (int s = 0; s < seeds; ++s) {
            SolveConfig cfg;
            cfg.mode = EstimationMode::Sampled;
            cfg.shots = shots;
            cfg.seed = Rng::derive(31337, {static_cast<std::uint64_t>(s)});
            const SolveReport report = solve_rank1_overlap(p, cfg);
            sq += std::pow(report.overlap.real() - exact, 2);
        }
        log_shots.push_back(std::log10(static_cast<double>(shots)));
        log_rms.push_back(0.5 * std::log10(sq / seeds));
    }

    // least-squares slope of log rms error vs log shots
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
        mx += log_shots[i];
        my += log_rms[i];
    }
    mx /= log_shots.size();
    my /= log_rms.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
        num += (log_shots[i] - mx) * (log_rms[i] - my);
        den += (log_shots[i] - mx) * (log_shots[i] - mx);
    }
    const double slope = num / den;
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("planned shot counts hold the assembled spread near epsilon") {
    // nondegenerate instance: the plan is built from the true overlaps and
    // the resulting Monte-Carlo spread must stay within a small multiple of
    // the target precision
    const std::uint32_t n = 3;
    const WoodburyProblem p = testutil::lopsided_rank1_instance(n);
    const double exact = testutil::lopsided_rank1_exact(n);
    const double epsilon = 0.01;

    const double root_n = std::sqrt(8.0);
    const Complex one(1.0, 0.0);
    const Complex small(1.0 / root_n, 0.0);
    const ShotPlan plan = shot_plan(epsilon, one, one, small, small, one);

    std::vector<double> errs;
    const int seeds = 40;
    double sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SolveConfig cfg;
        cfg.mode = EstimationMode::Sampled;
        cfg.plan = plan;
        cfg.seed = Rng::derive(808, {static_cast<std::uint64_t>(s)});
        const double est = solve_rank1_overlap(p, cfg).overlap.real();
        sq += (est - exact) * (est - exact);
    }
    const double rms = std::sqrt(sq / seeds);
    CHECK(rms <= 4.0 * epsilon);
    CHECK(rms > 0.0); // genuinely stochastic instance
}

TEST_CASE("solve_overlap dispatches by problem shape") {
    Rng rng(281);
    const WoodburyProblem r1 = random_problem(rng, 2, 1, ProblemCase::Rank1);
    const WoodburyProblem rk = random_problem(rng, 2, 2, ProblemCase::RankK);
    const WoodburyProblem ua = random_problem(rng, 2, 2, ProblemCase::UnitaryA);
    CHECK(std::abs(solve_overlap(r1, exact_cfg()).overlap -
                   solve_rank1_overlap(r1, exact_cfg()).overlap) == 0.0);
    CHECK(std::abs(solve_overlap(rk, exact_cfg()).overlap -
                   solve_rankk_overlap(rk, exact_cfg()).overlap) == 0.0);
    CHECK(std::abs(solve_overlap(ua, exact_cfg()).overlap -
                   solve_unitary_a_overlap(ua, exact_cfg()).overlap) == 0.0);
}

TEST_CASE("norm of the uniform-instance solution is one quarter") {
    // O = I: <x|x> with x = u/2
    HermitianLCU identity_obs;
    identity_obs.gammas = {Complex(1.0, 0.0)};
    identity_obs.w_circuits = {CircuitSpec::empty(2)};
    const HermitianExpectation e =
        expectation_hermitian(uniform_rank1_instance(2), identity_obs, exact_cfg());
    CHECK(e.value == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(e.imag_residue < 1e-10);
}

TEST_CASE("zero update reduces the expectation to <b|O|b>") {
    Rng rng(291);
    WoodburyProblem p = random_problem(rng, 2, 1, ProblemCase::Rank1);
    while (p.qubit_count() != 2) p = random_problem(rng, 2, 1, ProblemCase::Rank1);
    p.factors.alphas[0] = Complex(0.0, 0.0);
    const PauliSum obs = random_pauli_sum(rng, 3);
    const HermitianExpectation e = expectation_hermitian(p, obs.lcu, exact_cfg());

    const Vector b = prepared_state(p.b_preparer);
    const Complex expected = inner(b, obs.dense * b);
    CHECK(e.value == doctest::Approx(expected.real()).epsilon(1e-9));
}

TEST_CASE("hermitian expectation matches the dense quadratic form") {
    Rng rng(301);
    for (int trial = 0; trial < 8; ++trial) {
        WoodburyProblem p = random_problem(rng, 2, 1, ProblemCase::Rank1);
        while (p.qubit_count() != 2) p = random_problem(rng, 2, 1, ProblemCase::Rank1);
        const PauliSum obs = random_pauli_sum(rng, 4);

        const HermitianExpectation e = expectation_hermitian(p, obs.lcu, exact_cfg());

        // dense route: x = (I + UCV)^-1 b, value = x^H O x
        const Vector b = prepared_state(p.b_preparer);
        const Vector u0 = prepared_state(p.factors.u_preparers[0]);
        const Vector v0 = prepared_state(p.factors.v_preparers[0]);
        Matrix m = Matrix::identity(4);
        const Complex a0b0 = p.factors.alphas[0] * p.factors.betas[0];
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) m(r, c) += a0b0 * u0[r] * std::conj(v0[c]);
        const Vector x = direct_solve(m, b);
        const Complex expected = inner(x, obs.dense * x);

        CHECK(std::abs(e.value - expected.real()) < 1e-9);
        CHECK(std::abs(expected.imag()) < 1e-9);
    }
}

TEST_CASE("non-hermitian observables are rejected") {
    HermitianLCU bad;
    bad.gammas = {Complex(0.0, 1.0)}; // i * X is anti-Hermitian
    CircuitSpec w = CircuitSpec::empty(2);
    w.gates.push_back(Gate::x(0));
    bad.w_circuits = {w};
    CHECK_THROWS_AS(expectation_hermitian(uniform_rank1_instance(2), bad, exact_cfg()),
                    std::invalid_argument);
}

TEST_CASE("problem validation catches mismatched widths") {
    WoodburyProblem p = uniform_rank1_instance(3);
    p.z_preparer = uniform_preparer(2);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    WoodburyProblem q = uniform_rank1_instance(3);
    q.factors.betas.push_back(Complex(1.0, 0.0));
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

} // TEST_SUITE
