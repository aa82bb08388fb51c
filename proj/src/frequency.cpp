#include "loopgrade/frequency.hpp"

#include "loopgrade/errors.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace loopgrade {

namespace {

constexpr int kPointsPerDecade = 120;
constexpr int kMaxExtensionDecades = 12; // each direction beyond [1e-3, 1e3]/tau1

struct Bracket {
    double lo = 0.0, hi = 0.0;
    bool found = false;
};

/// First sign change of fn along an ascending log grid between omega values
/// lo and hi (inclusive endpoints, n intervals).
Bracket scan(const std::function<double(double)>& fn, double lo, double hi, int n) {
    const double step = std::log(hi / lo) / n;
    double w_prev = lo;
    double f_prev = fn(w_prev);
    for (int i = 1; i <= n; ++i) {
        const double w = lo * std::exp(step * i);
        const double f = fn(w);
        if (f == 0.0) return {w, w, true};
        if ((f_prev > 0.0) != (f > 0.0)) return {w_prev, w, true};
        w_prev = w;
        f_prev = f;
    }
    return {};
}

/// Scans the base grid, then grows it a decade at a time on both sides.
Bracket scan_extended(const std::function<double(double)>& fn, double tau1) {
    double lo = 1e-3 / tau1, hi = 1e3 / tau1;
    Bracket b = scan(fn, lo, hi, 6 * kPointsPerDecade);
    for (int ext = 0; !b.found && ext < kMaxExtensionDecades; ++ext) {
        const double lo2 = lo / 10.0, hi2 = hi * 10.0;
        b = scan(fn, lo2, lo, kPointsPerDecade);
        if (!b.found) b = scan(fn, hi, hi2, kPointsPerDecade);
        lo = lo2;
        hi = hi2;
    }
    return b;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi) {
    if (lo == hi) return lo;
    double f_lo = fn(lo);
    for (int it = 0; it < 120 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = fn(mid);
        if (f_mid == 0.0) return mid;
        if ((f_lo > 0.0) == (f_mid > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

bool Margins::gain_margin_finite() const { return std::isfinite(Am); }

std::complex<double> open_loop_response(const SopdtModel& model, const PidTuning& tuning,
                                        double omega) {
    model.validate();
    tuning.validate();
    const std::complex<double> s(0.0, omega);
    std::complex<double> c = tuning.kr * (1.0 + 1.0 / (s * tuning.Ti));
    if (tuning.Td > 0.0) c += tuning.kr * s * tuning.Td / (s * tuning.Tf() + 1.0);
    const std::complex<double> g =
        model.k * std::exp(-s * model.tau0) / ((s * model.tau1 + 1.0) * (s * model.tau2 + 1.0));
    return c * g;
}

double loop_phase(const SopdtModel& model, const PidTuning& tuning, double omega) {
    const double Ti = tuning.Ti, Td = tuning.Td, Tf = tuning.Tf();
    const double num_re = 1.0 - omega * omega * Ti * (Tf + Td);
    const double num_im = omega * (Ti + Tf);
    return std::atan2(num_im, num_re) - M_PI_2 - std::atan(omega * Tf) - omega * model.tau0 -
           std::atan(omega * model.tau1) - std::atan(omega * model.tau2);
}

Margins margins(const SopdtModel& model, const PidTuning& tuning) {
    model.validate();
    tuning.validate();

    const std::function<double(double)> gain_err = [&](double w) {
        return std::abs(open_loop_response(model, tuning, w)) - 1.0;
    };
    const std::function<double(double)> phase_err = [&](double w) {
        return loop_phase(model, tuning, w) + M_PI;
    };

    const Bracket gc = scan_extended(gain_err, model.tau1);
    if (!gc.found)
        throw NoCrossoverError("margins: |L| never crosses 1 on the extended grid");
    const double w_gc = bisect(gain_err, gc.lo, gc.hi);

    Margins m;
    m.omega_gc = w_gc;
    m.phi_m_deg = 180.0 + loop_phase(model, tuning, w_gc) * 180.0 / M_PI;

    const Bracket pc = scan_extended(phase_err, model.tau1);
    if (pc.found) {
        const double w_pc = bisect(phase_err, pc.lo, pc.hi);
        m.omega_pc = w_pc;
        m.Am = 1.0 / std::abs(open_loop_response(model, tuning, w_pc));
    } else {
        m.omega_pc = std::numeric_limits<double>::infinity();
        m.Am = std::numeric_limits<double>::infinity();
    }
    return m;
}

} // namespace loopgrade
