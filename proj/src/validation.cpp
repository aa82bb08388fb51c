#include "loopgrade/validation.hpp"

#include "loopgrade/errors.hpp"
#include "loopgrade/features.hpp"

#include <cmath>
#include <limits>

namespace loopgrade {

namespace {

std::vector<std::pair<double, double>> cross(const std::vector<double>& kr_factors,
                                             const std::vector<double>& ti_factors) {
    std::vector<std::pair<double, double>> bank;
    bank.reserve(kr_factors.size() * ti_factors.size());
    for (double a : kr_factors)
        for (double b : ti_factors) bank.emplace_back(a, b);
    return bank;
}

/// Scores one tuning variant against the reference entry. `plant` is the
/// process actually simulated; `judge` is the SOPDT model whose margins the
/// oracle reads (the plant itself, or its approximation for benchmark
/// plants).
ValidationCase score_case(double a_kr, double a_ti, const ReferenceEntry& ref,
                          const LagChainPlant& plant, const SopdtModel& judge,
                          const PidTuning& ref_tuning, const ClassifierModel& model) {
    ValidationCase vc;
    vc.a_kr = a_kr;
    vc.a_ti = a_ti;
    vc.dist = std::numeric_limits<double>::quiet_NaN();
    vc.tuning = apply_multipliers(ref_tuning, a_kr, a_ti, 1.0);

    try {
        vc.response = simulate_rejection(plant, vc.tuning, 1.0, ref.response_ref.dt);
        vc.unstable = vc.response.unstable;
        if (!vc.unstable) {
            vc.margins = margins(judge, vc.tuning);
            vc.dist = e_dist(ref.response_ref, vc.response);
            vc.oracle_ok = label_ok(ref.margins, vc.margins, vc.dist);
        }

        // The classifier consumes canonical-scale responses (unit gain, unit
        // dominant lag); rescale physical-time records through the judging
        // model. For canonical plants this is an exact no-op.
        RejectionResponse canon = vc.response;
        canon.dt = vc.response.dt / judge.tau1;
        const double amp = vc.response.gain / judge.k;
        for (double& x : canon.r) x *= amp;
        canon.gain = 1.0;
        vc.predicted_ok = predict(model, extract_features(canon));
    } catch (const std::exception& e) {
        vc.skipped = true;
        vc.note = e.what();
    }
    return vc;
}

void tally(SuiteReport& report) {
    for (const ValidationCase& vc : report.cases) {
        if (vc.skipped) continue;
        ++report.confusion[vc.oracle_ok ? 0 : 1][vc.predicted_ok ? 0 : 1];
        ++report.scored;
        if (vc.unstable) ++report.unstable_count;
    }
    report.accuracy =
        report.scored
            ? static_cast<double>(report.confusion[0][0] + report.confusion[1][1]) /
                  static_cast<double>(report.scored)
            : 0.0;
}

} // namespace

const std::vector<std::pair<double, double>>& sopdt_tuning_bank() {
    static const auto bank =
        cross({0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}, {0.4, 0.8, 1.0, 1.25, 2.5});
    return bank;
}

const std::vector<std::pair<double, double>>& benchmark_tuning_bank() {
    static const auto bank = cross({0.5, 1.0, 1.5, 2.5}, {0.4, 0.8, 1.0, 1.25, 2.5});
    return bank;
}

SuiteReport run_sopdt_suite(const ReferenceMesh& mesh, const NormalizedProcess& p,
                            const ClassifierModel& model) {
    SuiteReport report;
    report.name = "sopdt";
    report.process = p;
    report.reference = interpolate_tuning(mesh, p);

    const LagChainPlant plant = as_chain(p.denormalize());
    const SopdtModel judge = p.denormalize();
    for (const auto& [a, b] : sopdt_tuning_bank())
        report.cases.push_back(
            score_case(a, b, report.reference, plant, judge, report.reference.tuning, model));
    tally(report);
    return report;
}

BenchmarkReport run_benchmark_suite(const BenchmarkCase& bench, const ReferenceMesh& mesh,
                                    const ClassifierModel& model) {
    BenchmarkReport out;
    out.expected_l1 = bench.expected_l1;
    out.expected_l2 = bench.expected_l2;

    const LagChainPlant plant = bench.process.as_chain();
    out.fit = fit_sopdt(simulate_step(plant, 1.0));

    // Reference entry interpolated at the fitted pair, then mapped onto the
    // physical model so the real plant can be driven with it. Margins, the
    // reference response, and IAE are recomputed at the physical time scale.
    const ReferenceEntry canonical = interpolate_tuning(mesh, out.fit.normalized);
    ReferenceEntry ref;
    ref.process = out.fit.normalized;
    ref.tuning = denormalize_tuning(canonical.tuning, out.fit.model);
    ref.margins = margins(out.fit.model, ref.tuning);
    ref.response_ref = simulate_rejection(out.fit.model, ref.tuning);
    ref.iae_ref = iae(ref.response_ref);

    const RejectionResponse real_ref =
        simulate_rejection(plant, ref.tuning, 1.0, ref.response_ref.dt);
    out.reference_e_dist = e_dist(ref.response_ref, real_ref);

    out.suite.name = bench.name;
    out.suite.process = out.fit.normalized;
    out.suite.reference = ref;
    for (const auto& [a, b] : benchmark_tuning_bank())
        out.suite.cases.push_back(
            score_case(a, b, ref, plant, out.fit.model, ref.tuning, model));
    tally(out.suite);
    return out;
}

} // namespace loopgrade
