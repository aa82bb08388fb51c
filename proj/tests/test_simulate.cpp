#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/simulate.hpp"

#include <algorithm>
#include <cmath>

using namespace loopgrade;

namespace {

double max_abs_error(const StepResponse& resp, double (*analytic)(double)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < resp.y.size(); ++i) {
        const double t = resp.dt * static_cast<double>(i);
        worst = std::max(worst, std::abs(resp.y[i] - analytic(t)));
    }
    return worst;
}

const SopdtModel kPlant{2.0, 1.0, 0.5, 0.3};
const PidTuning kMildPid{0.8, 1.2, 0.2, 10.0};

} // namespace

TEST_CASE("step response of one lag matches 1 - exp(-t)") {
    const LagChainPlant plant{2.0, {1.0}, 0.0};
    const StepResponse resp = simulate_step(plant, 2.0, 1e-3);
    CHECK(resp.y.front() == 0.0);
    CHECK(resp.settled);
    CHECK(max_abs_error(resp, [](double t) { return 4.0 * (1.0 - std::exp(-t)); }) < 1e-8);
}

TEST_CASE("step response of two distinct lags matches the analytic sum") {
    const LagChainPlant plant{3.0, {1.0, 0.5}, 0.0};
    const StepResponse resp = simulate_step(plant, 1.5, 1e-3);
    // gain*A * (1 - 2 e^{-t} + e^{-2t}) for taus {1, 1/2}
    CHECK(max_abs_error(resp, [](double t) {
              return 4.5 * (1.0 - 2.0 * std::exp(-t) + std::exp(-2.0 * t));
          }) < 1e-8);
}

TEST_CASE("transport delay holds the output at zero, then shifts the response") {
    const LagChainPlant plant{1.0, {1.0}, 0.5};
    const StepResponse resp = simulate_step(plant, 1.0, 1e-3);
    // Strictly before the arrival instant nothing moves. The sample at
    // t = delay itself may carry one substage of input (the step turns on
    // inside the final integration stage), worth dt/6 at most.
    for (std::size_t i = 0; resp.dt * static_cast<double>(i) < 0.5 - 1e-9; ++i)
        CHECK(std::abs(resp.y[i]) < 1e-12);
    CHECK(max_abs_error(resp, [](double t) {
              return t <= 0.5 ? 0.0 : 1.0 - std::exp(-(t - 0.5));
          }) < 2.5e-4);
}

TEST_CASE("normalized rejection trajectory is independent of the disturbance size") {
    const RejectionResponse base = simulate_rejection(kPlant, kMildPid, 1.0, 5e-3);
    for (const double delta_d : {0.5, 2.0}) {
        const RejectionResponse scaled = simulate_rejection(kPlant, kMildPid, delta_d, 5e-3);
        REQUIRE(scaled.r.size() == base.r.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < base.r.size(); ++i)
            worst = std::max(worst, std::abs(scaled.r[i] - base.r[i]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("gain and time scaling of plant plus tuning leaves r unchanged") {
    const double c = 3.0, a = 2.0;
    const SopdtModel scaled_plant{kPlant.k * c, kPlant.tau1 * a, kPlant.tau2 * a,
                                  kPlant.tau0 * a};
    const PidTuning scaled_pid{kMildPid.kr / c, kMildPid.Ti * a, kMildPid.Td * a, kMildPid.N};

    const RejectionResponse base = simulate_rejection(kPlant, kMildPid, 1.0, 5e-3);
    const RejectionResponse scaled = simulate_rejection(scaled_plant, scaled_pid, 1.0, 5e-3 * a);
    REQUIRE(scaled.r.size() == base.r.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < base.r.size(); ++i)
        worst = std::max(worst, std::abs(scaled.r[i] - base.r[i]));
    CHECK(worst < 1e-9);
    CHECK(scaled.dt == doctest::Approx(base.dt * a).epsilon(1e-12));
}

TEST_CASE("a diverging loop is flagged unstable and truncated at the blow-up limit") {
    const PidTuning hot{50.0, 0.05, 0.0, 10.0};
    const RejectionResponse resp = simulate_rejection(kPlant, hot);
    CHECK(resp.unstable);
    CHECK_FALSE(resp.converged);
    for (const double v : resp.r) CHECK(std::abs(v) <= 1000.0);
    CHECK_THROWS_AS(require_stable(resp), UnstableError);
}

TEST_CASE("a mild loop settles inside the band before the horizon cap") {
    const RejectionResponse resp = simulate_rejection(kPlant, kMildPid);
    CHECK(resp.converged);
    CHECK_FALSE(resp.unstable);
    CHECK(std::abs(resp.r.back()) <= 1e-3);
    CHECK(resp.horizon() < 200.0 * (kPlant.tau1 + kPlant.tau0));
    CHECK(resp.r.front() == 0.0);
}

TEST_CASE("iae integrates |r| with trapezoid accuracy") {
    RejectionResponse resp;
    resp.dt = 1e-3;
    const std::size_t n = 20001; // horizon 20, exp(-20) ~ 2e-9
    resp.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) resp.r[i] = std::exp(-resp.dt * static_cast<double>(i));
    CHECK(std::abs(iae(resp) - 1.0) < 1e-5);
}

TEST_CASE("lags below the integration step are dropped without visible effect") {
    const PidTuning pid{0.6, 1.0, 0.1, 10.0};
    const LagChainPlant with_tiny{1.0, {1.0, 1e-4}, 0.3};
    const LagChainPlant without{1.0, {1.0}, 0.3};

    // At dt = 5e-3 the 1e-4 lag is below the step and must drop out exactly.
    const RejectionResponse coarse = simulate_rejection(with_tiny, pid, 1.0, 5e-3);
    const RejectionResponse ref = simulate_rejection(without, pid, 1.0, 5e-3);
    REQUIRE(coarse.r.size() == ref.r.size());
    for (std::size_t i = 0; i < ref.r.size(); ++i) CHECK(coarse.r[i] == ref.r[i]);

    // Resolving the tiny lag with a fine step bounds the modeling error the
    // drop introduces: a 1e-4 lag moves the trajectory by well under 2e-3.
    const RejectionResponse fine = simulate_rejection(with_tiny, pid, 1.0, 5e-5);
    const std::size_t stride = 100; // 5e-3 / 5e-5
    const std::size_t common = std::min(coarse.r.size(), fine.r.size() / stride);
    double worst = 0.0;
    for (std::size_t i = 0; i < common; ++i)
        worst = std::max(worst, std::abs(coarse.r[i] - fine.r[i * stride]));
    CHECK(worst < 2e-3);
}

TEST_CASE("default step is the fastest dynamic over 50, clamped to [1e-3, 1e-2]") {
    CHECK(default_step(SopdtModel{1.0, 1.0, 0.5, 2.0}) == doctest::Approx(1e-2));
    CHECK(default_step(SopdtModel{1.0, 1.0, 0.02, 0.04}) == doctest::Approx(1e-3));
    CHECK(default_step(SopdtModel{1.0, 10.0, 8.0, 9.0}) == doctest::Approx(1e-2));
    CHECK(default_step(SopdtModel{1.0, 1.0, 0.25, 0.4}) == doctest::Approx(0.25 / 50.0));
}
