#pragma once

#include "loopgrade/classifiers.hpp"
#include "loopgrade/dataset.hpp"
#include "loopgrade/identify.hpp"
#include "loopgrade/reference.hpp"

#include <string>
#include <utility>
#include <vector>

namespace loopgrade {

/// One tuning variant exercised by a validation suite. The oracle verdict
/// comes from the labeling rule evaluated on ground truth (margins + distance
/// to reference); the predicted verdict comes from the classifier under test.
struct ValidationCase {
    double a_kr = 1.0; // multipliers applied to the reference tuning
    double a_ti = 1.0;
    PidTuning tuning;
    bool skipped = false; // case could not be scored; excluded from accuracy
    std::string note;
    bool unstable = false;
    bool oracle_ok = false;
    bool predicted_ok = false;
    double dist = 0.0; // e_dist to the reference response (NaN when skipped)
    Margins margins;
    RejectionResponse response;
};

struct SuiteReport {
    std::string name;
    NormalizedProcess process;
    ReferenceEntry reference;
    std::vector<ValidationCase> cases;
    // Rows: oracle {OK, NOK}; columns: predicted {OK, NOK}.
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
    std::size_t scored = 0;
    std::size_t unstable_count = 0;
    double accuracy = 0.0;
};

/// Fixed multiplier grids (kr factor, Ti factor) standing in for hand-picked
/// tuning banks: 7x5 = 35 pairs for the SOPDT suites, 4x5 = 20 for the
/// higher-order benchmark suites. Derivative time stays at the reference.
const std::vector<std::pair<double, double>>& sopdt_tuning_bank();
const std::vector<std::pair<double, double>>& benchmark_tuning_bank();

/// Runs the 35-case tuning bank on one SOPDT process: each variant is
/// simulated, labeled by the oracle, and classified from its extracted
/// features. Per-case failures are recorded and skipped, not fatal.
SuiteReport run_sopdt_suite(const ReferenceMesh& mesh, const NormalizedProcess& p,
                            const ClassifierModel& model);

struct BenchmarkReport {
    SuiteReport suite;
    FitResult fit;            // SOPDT approximation of the benchmark plant
    double expected_l1 = 0.0; // tabulated normalized pair for this plant
    double expected_l2 = 0.0;
    double reference_e_dist = 0.0; // real plant vs SOPDT approximation, both
                                   // under the reference tuning
};

/// Higher-order chain: step-identifies the SOPDT approximation, derives the
/// reference tuning from the mesh, then runs the 20-case bank on the real
/// plant while the oracle judges margins through the SOPDT approximation.
BenchmarkReport run_benchmark_suite(const BenchmarkCase& bench, const ReferenceMesh& mesh,
                                    const ClassifierModel& model);

} // namespace loopgrade
