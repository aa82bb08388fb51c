#pragma once

#include "loopgrade/process.hpp"

#include <complex>

namespace loopgrade {

/// Stability margins of the loop transfer C(s)G(s). Am is the classical gain
/// margin 1/|L(j*omega_pc)|; phi_m_deg the phase margin at the first gain
/// crossover. Loops whose phase never reaches -180 degrees on the extended
/// grid report Am = omega_pc = +infinity.
struct Margins {
    double Am = 0.0;
    double phi_m_deg = 0.0;
    double omega_gc = 0.0;
    double omega_pc = 0.0;

    bool gain_margin_finite() const;
};

/// L(j*omega) = C(j*omega) * G(j*omega) for the PID controller and SOPDT
/// process, evaluated analytically.
std::complex<double> open_loop_response(const SopdtModel& model, const PidTuning& tuning,
                                        double omega);

/// Continuous loop phase in radians. The PID numerator quadratic
/// 1 - w^2*Ti*(Tf+Td) + j*w*(Ti+Tf) has a positive imaginary part for all
/// w > 0, so atan2 on it is continuous and no unwrapping step is needed; the
/// delay enters as the exact linear term -w*tau0.
double loop_phase(const SopdtModel& model, const PidTuning& tuning, double omega);

/// Crossover search on a logarithmic grid over [1e-3, 1e3]/tau1, extended
/// outward by decades when a crossing lies outside the base span, refined by
/// bisection. Throws NoCrossoverError if |L| never crosses 1 on the extended
/// grid.
Margins margins(const SopdtModel& model, const PidTuning& tuning);

} // namespace loopgrade
