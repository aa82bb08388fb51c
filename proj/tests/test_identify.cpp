#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/identify.hpp"

#include <cmath>

using namespace loopgrade;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace

TEST_CASE("triple-lag chain step response matches the closed form") {
    const HigherOrderProcess g1{HigherOrderFamily::G1, 3.0};
    const LagChainPlant chain = g1.as_chain();
    REQUIRE(chain.taus.size() == 3);
    CHECK(chain.delay == 0.0);

    const StepResponse resp = simulate_step(chain, 1.0, 1e-3);
    double worst = 0.0;
    for (std::size_t i = 0; i < resp.y.size(); ++i) {
        const double t = resp.dt * static_cast<double>(i);
        const double want = 1.0 - std::exp(-t) * (1.0 + t + 0.5 * t * t);
        worst = std::max(worst, std::abs(resp.y[i] - want));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("the delayed-cascade family expands to geometric lags") {
    const HigherOrderProcess g2{HigherOrderFamily::G2, 2.0};
    const LagChainPlant chain = g2.as_chain();
    REQUIRE(chain.taus.size() == 4);
    CHECK(chain.taus[0] == 1.0);
    CHECK(chain.taus[1] == 2.0);
    CHECK(chain.taus[2] == 4.0);
    CHECK(chain.taus[3] == 8.0);
    CHECK(chain.delay == 2.0);

    CHECK_THROWS(HigherOrderProcess{HigherOrderFamily::G1, 0.0}.validate());
}

TEST_CASE("the benchmark bank spans the design range with both families") {
    const auto& bank = benchmark_bank();
    REQUIRE(bank.size() == 7);
    int g1 = 0, g2 = 0;
    for (const BenchmarkCase& bench : bank) {
        CAPTURE(bench.name);
        CHECK(bench.name != nullptr);
        CHECK(NormalizedProcess{bench.expected_l1, bench.expected_l2}.in_design_range());
        (bench.process.family == HigherOrderFamily::G1 ? g1 : g2) += 1;
    }
    CHECK(g1 >= 1);
    CHECK(g2 >= 1);
}

TEST_CASE("fitting a true second-order-plus-delay record recovers the model") {
    const SopdtModel truth{1.3, 2.0, 0.7, 0.9};
    const StepResponse record = simulate_step(as_chain(truth), 2.0, 0.01);
    const FitResult fit = fit_sopdt(record);

    CHECK(rel_err(fit.model.k, truth.k) < 0.01);
    CHECK(rel_err(fit.model.tau1, truth.tau1) < 0.01);
    CHECK(rel_err(fit.model.tau2, truth.tau2) < 0.01);
    CHECK(rel_err(fit.model.tau0, truth.tau0) < 0.01);
    CHECK(fit.model.tau1 >= fit.model.tau2);
    CHECK(fit.residual < 0.01);

    const NormalizedProcess n = fit.model.normalized();
    CHECK(fit.normalized.L1 == n.L1);
    CHECK(fit.normalized.L2 == n.L2);
}

TEST_CASE("fits from records on different grids agree") {
    const SopdtModel truth{0.8, 1.6, 0.5, 0.6};
    const FitResult fine = fit_sopdt(simulate_step(as_chain(truth), 1.0, 0.01));
    const FitResult coarse = fit_sopdt(simulate_step(as_chain(truth), 1.0, 0.02));
    CHECK(rel_err(coarse.model.k, fine.model.k) < 0.02);
    CHECK(rel_err(coarse.model.tau1, fine.model.tau1) < 0.02);
    CHECK(rel_err(coarse.model.tau2, fine.model.tau2) < 0.02);
    CHECK(rel_err(coarse.model.tau0, fine.model.tau0) < 0.02);
}

TEST_CASE("closed-loop records identify the plant under a known tuning") {
    const SopdtModel truth = NormalizedProcess{0.3, 0.5}.denormalize();
    const PidTuning pid{0.8, 1.2, 0.1, 10.0};
    const RejectionResponse record = simulate_rejection(truth, pid, 0.7);
    REQUIRE(record.converged);

    const FitResult fit = fit_sopdt_closed_loop(record, pid, 0.7);
    CHECK(rel_err(fit.model.k, truth.k) < 0.02);
    CHECK(rel_err(fit.model.tau1, truth.tau1) < 0.02);
    CHECK(rel_err(fit.model.tau2, truth.tau2) < 0.02);
    CHECK(rel_err(fit.model.tau0, truth.tau0) < 0.02);
}

TEST_CASE("a record that never reaches steady state is rejected") {
    const SopdtModel truth{1.0, 2.0, 1.0, 0.5};
    // Cap the run at ~1.2 time scales: the tail is still rising.
    const StepResponse cut = simulate_step(as_chain(truth), 1.0, 0.01, 1e-4, 1.2);
    CHECK_THROWS_AS(fit_sopdt(cut), NotSettledError);
}

TEST_CASE("a shape no overdamped model can express diverges the fit") {
    // Settled step with a large mid-transient bump; the best residual stays
    // far above the acceptance fraction of the span.
    StepResponse record;
    record.dt = 0.05;
    record.amplitude = 1.0;
    record.y.resize(201);
    for (std::size_t i = 0; i < record.y.size(); ++i) {
        const double t = record.dt * static_cast<double>(i);
        record.y[i] = t >= 8.0
                          ? 2.0
                          : 2.0 * (1.0 - std::exp(-t)) + 1.5 * std::exp(-2.0 * (t - 3.0) * (t - 3.0));
    }
    record.settled = true;
    CHECK_THROWS_AS(fit_sopdt(record), FitDivergedError);
}

TEST_CASE("trailing moving average smooths causally with a warm-up") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    CHECK(moving_average(y, 2) == std::vector<double>{1.0, 1.5, 2.5, 3.5});
    CHECK(moving_average(y, 1) == y);
    CHECK(moving_average(y, 0) == y);
    CHECK(moving_average({}, 4).empty());
}

TEST_CASE("step records come off a uniform grid in deviation form") {
    TimeSeries series;
    series.t = {1.0, 1.1, 1.2, 1.3};
    series.v = {5.0, 6.0, 7.0, 7.5};
    const StepResponse record = step_record_from_series(series, 2.0);
    CHECK(record.dt == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(record.amplitude == 2.0);
    REQUIRE(record.y.size() == 4);
    CHECK(record.y[0] == 0.0);
    CHECK(record.y[1] == doctest::Approx(1.0));
    CHECK(record.y[3] == doctest::Approx(2.5));

    TimeSeries ragged;
    ragged.t = {0.0, 0.1, 0.25};
    ragged.v = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(step_record_from_series(ragged, 1.0), std::domain_error);
}
