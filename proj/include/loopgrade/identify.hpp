#pragma once

#include "loopgrade/io.hpp"
#include "loopgrade/process.hpp"
#include "loopgrade/simulate.hpp"

#include <array>
#include <vector>

namespace loopgrade {

enum class HigherOrderFamily { G1, G2 };

/// Benchmark plants used to validate the assessment chain on processes that
/// are not themselves SOPDT:
///   G1: 1 / (1+s)^alpha           (alpha = repeated-lag count, a small integer)
///   G2: e^{-alpha s} / ((1+s)(1+alpha s)(1+alpha^2 s)(1+alpha^3 s))
struct HigherOrderProcess {
    HigherOrderFamily family = HigherOrderFamily::G1;
    double alpha = 3.0;

    LagChainPlant as_chain() const;
    void validate() const;
};

/// Seven-plant validation bank covering the design range of normalized pairs.
struct BenchmarkCase {
    const char* name;
    HigherOrderProcess process;
    double expected_l1; // normalized pair of the plant's SOPDT approximation
    double expected_l2;
};

const std::array<BenchmarkCase, 7>& benchmark_bank();

struct FitResult {
    SopdtModel model;
    double residual = 0.0; // RMS mismatch between the record and the fit
    NormalizedProcess normalized;
};

/// Optional smoothing for measured records; identity when window < 2.
std::vector<double> moving_average(const std::vector<double>& y, int window);

/// Uniform-grid step record from a sampled series; values are shifted so the
/// record starts at zero (deviation form). Throws std::domain_error when the
/// time grid is not evenly spaced.
StepResponse step_record_from_series(const TimeSeries& series, double amplitude);

/// Fits (k, tau1, tau2, tau0) so the model's open-loop step response matches
/// the record in least squares on the record's own grid. Derivative-free
/// search in log-parameter space from a graphical estimate (steady gain,
/// 2%-departure delay, 63%-rise lag total split 2:1) plus jittered restarts;
/// tau1 >= tau2 is restored by sorting afterwards.
/// Throws NotSettledError when the record tail has not flattened out and
/// FitDivergedError when the best residual exceeds 10% of the record span.
FitResult fit_sopdt(const StepResponse& record);

/// Same optimizer, but the comparator is the closed loop: candidate models
/// are simulated under the given tuning and disturbance size, and physical
/// outputs y = r * gain * delta_d are compared on the record grid.
FitResult fit_sopdt_closed_loop(const RejectionResponse& record, const PidTuning& tuning,
                                double delta_d);

} // namespace loopgrade
