#pragma once

#include "loopgrade/process.hpp"

#include <vector>

namespace loopgrade {

/// Series of first-order lags plus a transport delay:
///   gain * exp(-delay*s) / prod_i (taus[i]*s + 1).
/// Shared plant form for SOPDT loops and higher-order benchmark processes.
struct LagChainPlant {
    double gain = 1.0;
    std::vector<double> taus;
    double delay = 0.0;

    double time_scale() const;
    void validate() const;
};

LagChainPlant as_chain(const SopdtModel& model);

/// Stop rules for closed-loop runs, in units of the plant time scale
/// (tau1 + tau0 for SOPDT).
struct HorizonPolicy {
    double settle_band = 1e-3; // |r| band that counts as settled
    double settle_hold = 5.0;  // band must hold this many time scales
    double horizon_cap = 200.0;
    double blowup_limit = 1000.0; // |r| beyond this flags instability
};

/// Load-disturbance rejection trajectory, normalized as
///   r(t) = (y(t) - y_pre) / (gain * delta_d),
/// so r is invariant to the disturbance size and the process gain.
struct RejectionResponse {
    double dt = 0.0;
    std::vector<double> r; // r[0] = 0 at t = 0
    double gain = 1.0;     // process static gain, kept for physical reconstruction
    double delta_d = 1.0;
    bool converged = false; // settled inside the band before the cap
    bool unstable = false;  // |r| exceeded the blow-up limit; r is truncated

    double horizon() const { return r.empty() ? 0.0 : dt * static_cast<double>(r.size() - 1); }
    double time_at(std::size_t i) const { return dt * static_cast<double>(i); }
};

/// Open-loop step record: y sampled on a uniform grid after a step of the
/// given amplitude applied at t = 0.
struct StepResponse {
    double dt = 0.0;
    std::vector<double> y; // y[0] = 0
    double amplitude = 1.0;
    double gain = 1.0;
    bool settled = false;

    double horizon() const { return y.empty() ? 0.0 : dt * static_cast<double>(y.size() - 1); }
};

/// Default integration step: min(tau2, tau0)/50 clamped to [1e-3, 1e-2].
double default_step(const SopdtModel& model);
double default_step(const LagChainPlant& plant);

/// Closed-loop response to a load-disturbance step delta_d entering at the
/// plant input, ahead of the delay. Fixed-step RK4; the delayed plant input
/// is reconstructed from per-step history by linear interpolation. Lags
/// shorter than the step are dropped (their contribution is below the
/// integration error at these tolerances). dt = 0 selects the default step.
/// Throws NumericalFailure if the state leaves the finite range.
RejectionResponse simulate_rejection(const SopdtModel& model, const PidTuning& tuning,
                                     double delta_d = 1.0, double dt = 0.0,
                                     const HorizonPolicy& policy = {});
RejectionResponse simulate_rejection(const LagChainPlant& plant, const PidTuning& tuning,
                                     double delta_d = 1.0, double dt = 0.0,
                                     const HorizonPolicy& policy = {});

/// Open-loop step response; runs until y holds within settle_band of its
/// final value for two time scales, or until cap_factor time scales.
StepResponse simulate_step(const LagChainPlant& plant, double amplitude, double dt = 0.0,
                           double settle_band = 1e-4, double cap_factor = 50.0);

/// Integral of |r| over the stored horizon (trapezoidal rule).
double iae(const RejectionResponse& response);

/// Throws UnstableError if the trajectory blew up.
void require_stable(const RejectionResponse& response);

} // namespace loopgrade
