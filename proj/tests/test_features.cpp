#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace loopgrade;

namespace {

RejectionResponse sampled(double dt, double horizon, double (*f)(double)) {
    RejectionResponse resp;
    resp.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
    resp.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) resp.r[i] = f(dt * static_cast<double>(i));
    resp.converged = true;
    return resp;
}

// Piecewise-linear pulse with every breakpoint on the dt = 0.1 grid:
// up to 1 at t=1, down to -0.5 at t=2.5 (zero hit exactly at t=2), back to 0
// at t=3.5, flat afterwards. Each indicator is computable by hand. Samples
// come from index arithmetic so the sign pattern is exact, including the
// on-grid zeros at t=2 and t=3.5.
RejectionResponse triangle_pulse() {
    RejectionResponse resp;
    resp.dt = 0.1;
    resp.r.resize(61);
    for (int i = 0; i <= 60; ++i) {
        double v = 0.0;
        if (i <= 10) v = 0.1 * i;
        else if (i <= 25) v = 0.1 * (20 - i);
        else if (i <= 35) v = -0.05 * (35 - i);
        resp.r[static_cast<std::size_t>(i)] = v;
    }
    resp.converged = true;
    return resp;
}

double damped_sine(double t) { return std::exp(-0.2 * t) * std::sin(t); }
double sine_pulse(double t) { return t <= M_PI ? std::sin(t) : 0.0; }
double exp_decay(double t) { return std::exp(-t); }

bool close(double got, double want, double tol) { return std::abs(got - want) <= tol; }

} // namespace

TEST_CASE("triangle pulse reproduces every hand-computed indicator") {
    const RejectionResponse resp = triangle_pulse();
    const FeatureVector f = extract_features(resp);

    CHECK(close(f[0], 1.0, 1e-12));   // peak value
    CHECK(close(f[1], 1.0, 1e-12));   // peak time
    CHECK(close(f[2], 0.5, 1e-12));   // undershoot depth
    CHECK(close(f[3], 2.5, 1e-12));   // undershoot time
    CHECK(close(f[4], 0.5, 1e-12));   // depth / peak
    CHECK(close(f[5], 1.5, 1e-12));   // undershoot lag
    CHECK(close(f[6], 3.4, 1e-12));   // last |r| >= 0.01
    CHECK(close(f[7], 1.375, 1e-12)); // IAE, exact for piecewise-linear r
    CHECK(close(f[8], 1.0 / 3.0 + 0.375 + 1.0 / 12.0, 0.01)); // ISE = 0.79167 analytic
    CHECK(close(f[9], 2.0, 0.02));                            // ITAE analytic
    CHECK(close(f[10], 3.869792, 0.04));                      // t^2-weighted IAE analytic
    CHECK(close(f[11], 1.0, 1e-12));                          // positive lobe area
    CHECK(close(f[12], 0.375, 1e-12));                        // negative lobe area
    CHECK(close(f[13], 0.375, 1e-12));                        // lobe ratio
    CHECK(f[14] == 0.0);                                      // no second positive peak
    CHECK(f[15] == 0.0);
    CHECK(close(f[16], 2.4, 1e-12));        // settle lag after the peak
    CHECK(close(f[17], 1.9, 1e-12));        // dwell above zero
    CHECK(close(f[18], 1.4, 1e-12));        // dwell below zero
    CHECK(close(f[19], 1.4 / 1.9, 1e-12));  // dwell ratio
    CHECK(close(f[20], 0.9, 1e-12));        // rise 5% -> 95%
    CHECK(close(f[21], 0.9, 1e-12));        // fall 95% -> 5%
    CHECK(close(f[22], 1.0, 1e-12));        // rise / fall
    CHECK(close(f[23], 3.0, 1e-12));        // last exit from 25% band
    CHECK(close(f[24], 2.5, 1e-12));        // last exit from 50% band
    CHECK(close(f[25], 1.2, 1e-12));        // last exit from 75% band
    CHECK(close(f[26], 2.0, 1e-12));        // first zero return after the peak
    CHECK(close(f[27], 1.0, 1e-12));        // steepest rise
    CHECK(close(f[28], 1.0, 1e-12));        // steepest fall, magnitude
    CHECK(close(f[29], 1.0, 1e-12));        // slope ratio
}

TEST_CASE("damped sinusoid: peak time, decay ratio, and period are analytic") {
    const RejectionResponse resp = sampled(1e-3, 40.0, damped_sine);
    const FeatureVector f = extract_features(resp);
    CHECK(close(f[1], std::atan(5.0), 0.005));          // first peak of e^{-t/5} sin t
    CHECK(close(f[14], std::exp(-0.4 * M_PI), 0.005));  // second peak / first peak
    CHECK(close(f[15], 2.0 * M_PI, 0.01));              // peak-to-peak period
    CHECK(close(f[26], M_PI, 1e-3));                    // first zero return
}

TEST_CASE("half-sine pulse: integrals and dwell split are analytic") {
    const RejectionResponse resp = sampled(1e-3, 10.0, sine_pulse);
    const FeatureVector f = extract_features(resp);
    CHECK(close(f[0], 1.0, 1e-6));
    CHECK(close(f[1], M_PI / 2.0, 2e-3));
    CHECK(f[2] == 0.0); // never goes negative
    CHECK(f[4] == 0.0);
    CHECK(close(f[7], 2.0, 0.002));       // integral of sin over one half period
    CHECK(close(f[8], M_PI / 2.0, 0.002));
    CHECK(close(f[17], M_PI, 0.01));      // dwell above zero
    CHECK(f[18] == 0.0);
    CHECK(f[19] == 0.0);
    CHECK(f[14] == 0.0);
    CHECK(f[15] == 0.0);
    CHECK(close(f[26], M_PI, 1e-3));
}

TEST_CASE("pure decay: degenerate-shape conventions") {
    const RejectionResponse resp = sampled(1e-3, 10.0, exp_decay);
    const FeatureVector f = extract_features(resp);
    CHECK(f[2] == 0.0);  // no undershoot
    CHECK(f[12] == 0.0); // no negative lobe
    CHECK(f[13] == 0.0);
    CHECK(f[14] == 0.0); // no second peak
    CHECK(f[26] == doctest::Approx(10.0)); // never returns to zero -> horizon
    CHECK(close(f[28], 1.0, 0.01));        // steepest fall is the initial slope
    CHECK(std::abs(f[27]) < 1e-3);         // slope is never positive
    CHECK(std::abs(f[29]) < 1e-3);
    CHECK(close(f[23], std::log(4.0), 1e-3));       // 25% band exit
    CHECK(close(f[24], std::log(2.0), 1e-3));       // 50% band exit
    CHECK(close(f[25], std::log(4.0 / 3.0), 1e-3)); // 75% band exit
    CHECK(close(f[6], std::log(100.0), 1e-3));      // last |r| >= 0.01
}

TEST_CASE("ratio indicators satisfy their defining identities exactly") {
    const RejectionResponse resp = sampled(1e-3, 40.0, damped_sine);
    const FeatureVector f = extract_features(resp);
    REQUIRE(f[0] > 0.0);
    CHECK(close(f[4], f[2] / f[0], 1e-12));
    CHECK(close(f[5], f[3] - f[1], 1e-12));
    CHECK(close(f[16], f[6] - f[1], 1e-12));
    REQUIRE(f[11] > 0.0);
    CHECK(close(f[13], f[12] / f[11], 1e-12));
    REQUIRE(f[17] > 0.0);
    CHECK(close(f[19], f[18] / f[17], 1e-12));
    REQUIRE(f[21] > 0.0);
    CHECK(close(f[22], f[20] / f[21], 1e-12));
    REQUIRE(f[28] > 0.0);
    CHECK(close(f[29], f[27] / f[28], 1e-12));
}

TEST_CASE("time scaling maps each indicator by its physical dimension") {
    const RejectionResponse base = sampled(1e-3, 40.0, damped_sine);
    const FeatureVector f0 = extract_features(base);

    for (const double a : {0.5, 3.0}) {
        CAPTURE(a);
        RejectionResponse scaled = base;
        scaled.dt = base.dt * a;
        const FeatureVector fa = extract_features(scaled);

        const auto expect = [&](int idx, double factor) {
            const double want = f0[idx] * factor;
            CHECK_MESSAGE(std::abs(fa[idx] - want) <= 1e-9 * std::max(1.0, std::abs(want)),
                          "indicator ", idx + 1, ": got ", fa[idx], " want ", want);
        };

        for (const int idx : {1, 3, 5, 6, 15, 16, 17, 18, 20, 21, 23, 24, 25, 26})
            expect(idx, a); // times and durations
        for (const int idx : {7, 8, 11, 12}) expect(idx, a);  // dt-weighted integrals
        expect(9, a * a);                                     // t-weighted integral
        expect(10, a * a * a);                                // t^2-weighted integral
        for (const int idx : {27, 28}) expect(idx, 1.0 / a);  // slopes
        for (const int idx : {0, 2, 4, 13, 14, 19, 22, 29}) expect(idx, 1.0); // ratios, values
    }
}

TEST_CASE("amplitude scaling leaves the six shape ratios unchanged") {
    const RejectionResponse base = sampled(1e-3, 40.0, damped_sine);
    const FeatureVector f0 = extract_features(base);

    for (const double c : {0.5, 3.0}) {
        CAPTURE(c);
        RejectionResponse scaled = base;
        for (double& v : scaled.r) v *= c;
        const FeatureVector fc = extract_features(scaled);
        for (const int idx : {4, 13, 14, 19, 22, 29}) {
            CHECK_MESSAGE(std::abs(fc[idx] - f0[idx]) <= 1e-9 * std::max(1.0, std::abs(f0[idx])),
                          "indicator ", idx + 1);
        }
        CHECK(close(fc[0], c * f0[0], 1e-12 * c)); // peak scales proportionally
    }
}

TEST_CASE("degenerate trajectories are rejected") {
    RejectionResponse flat;
    flat.dt = 0.01;
    flat.r.assign(500, 1e-8);
    CHECK_THROWS_AS(extract_features(flat), DegenerateResponseError);

    RejectionResponse tiny;
    tiny.dt = 0.01;
    tiny.r = {0.0, 1.0};
    CHECK_THROWS_AS(extract_features(tiny), DegenerateResponseError);
}

TEST_CASE("names, header, and the popular projection are frozen") {
    CHECK(std::string(kFeatureNames[0]) == "F1");
    CHECK(std::string(kFeatureNames[29]) == "F30");

    std::string joined;
    for (int i = 0; i < kFeatureCount; ++i) {
        if (i) joined += ',';
        joined += kFeatureNames[i];
    }
    CHECK(feature_header() == joined);

    const std::array<int, kPopularCount> want{0, 2, 4, 6, 7, 8, 9, 10, 14, 15, 27, 28};
    CHECK(kPopularFeatureIndices == want);

    FeatureVector fv{};
    for (int i = 0; i < kFeatureCount; ++i) fv[i] = 100.0 + i;
    const auto sub = popular_subset(fv);
    for (int i = 0; i < kPopularCount; ++i) CHECK(sub[i] == fv[kPopularFeatureIndices[i]]);
}
