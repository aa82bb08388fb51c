#include "loopgrade/simulate.hpp"

#include "loopgrade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace loopgrade {

namespace {

constexpr std::size_t kMaxLags = 8;

double clamp_step(double raw) { return std::clamp(raw / 50.0, 1e-3, 1e-2); }

/// Linear interpolation into the per-step plant-input history. Queries before
/// t = 0 read the pre-disturbance input (zero); queries past the last stored
/// sample hold the newest value, which only happens when delay < dt.
double delayed_input(const std::vector<double>& hist, double q, double dt) {
    if (q < 0.0) return 0.0;
    const double x = q / dt;
    const auto j = static_cast<std::size_t>(x);
    if (j + 1 >= hist.size()) return hist.back();
    const double f = x - static_cast<double>(j);
    return hist[j] + f * (hist[j + 1] - hist[j]);
}

struct LoopState {
    double s[kMaxLags]; // lag chain, s[n-1] is the output
    double xi;          // PID integrator state
    double w;           // filtered error state
};

} // namespace

double LagChainPlant::time_scale() const {
    return std::accumulate(taus.begin(), taus.end(), 0.0) + delay;
}

void LagChainPlant::validate() const {
    if (!(gain > 0.0)) throw std::domain_error("LagChainPlant: gain must be > 0");
    if (taus.empty()) throw std::domain_error("LagChainPlant: needs at least one lag");
    if (taus.size() > kMaxLags) throw std::domain_error("LagChainPlant: too many lags");
    for (double tau : taus)
        if (!(tau > 0.0)) throw std::domain_error("LagChainPlant: lags must be > 0");
    if (delay < 0.0) throw std::domain_error("LagChainPlant: delay must be >= 0");
}

LagChainPlant as_chain(const SopdtModel& model) {
    model.validate();
    return {model.k, {model.tau1, model.tau2}, model.tau0};
}

double default_step(const SopdtModel& model) {
    model.validate();
    return clamp_step(std::min(model.tau2, model.tau0));
}

double default_step(const LagChainPlant& plant) {
    plant.validate();
    double shortest = *std::min_element(plant.taus.begin(), plant.taus.end());
    if (plant.delay > 0.0) shortest = std::min(shortest, plant.delay);
    return clamp_step(shortest);
}

RejectionResponse simulate_rejection(const SopdtModel& model, const PidTuning& tuning,
                                     double delta_d, double dt, const HorizonPolicy& policy) {
    return simulate_rejection(as_chain(model), tuning, delta_d, dt, policy);
}

RejectionResponse simulate_rejection(const LagChainPlant& plant, const PidTuning& tuning,
                                     double delta_d, double dt, const HorizonPolicy& policy) {
    plant.validate();
    tuning.validate();
    if (delta_d == 0.0) throw std::domain_error("simulate_rejection: delta_d must be nonzero");
    if (dt == 0.0) dt = default_step(plant);
    if (!(dt > 0.0)) throw std::domain_error("simulate_rejection: dt must be > 0");

    // Sub-step lags are below the integration error floor; keep at least one.
    double taus[kMaxLags];
    std::size_t n = 0;
    for (double tau : plant.taus)
        if (tau >= dt) taus[n++] = tau;
    if (n == 0) taus[n++] = *std::max_element(plant.taus.begin(), plant.taus.end());

    const double scale = plant.time_scale();
    const double hold = policy.settle_hold * scale;
    const double cap = policy.horizon_cap * scale;
    const auto max_steps = static_cast<std::size_t>(std::ceil(cap / dt));

    const double kr = tuning.kr, Ti = tuning.Ti, Td = tuning.Td;
    const double Tf = tuning.Tf();
    const bool has_d = Td > 0.0;
    const double r_norm = plant.gain * delta_d;

    LoopState x{};
    for (std::size_t i = 0; i < n; ++i) x.s[i] = 0.0;
    x.xi = 0.0;
    x.w = 0.0;

    auto control = [&](const LoopState& st) {
        const double e = -st.s[n - 1];
        double u = e + st.xi / Ti;
        if (has_d) u += Td * (e - st.w) / Tf;
        return kr * u;
    };
    auto derivs = [&](const LoopState& st, double vd, LoopState& d) {
        double upstream = plant.gain * vd;
        for (std::size_t i = 0; i < n; ++i) {
            d.s[i] = (upstream - st.s[i]) / taus[i];
            upstream = st.s[i];
        }
        const double e = -st.s[n - 1];
        d.xi = e;
        d.w = has_d ? (e - st.w) / Tf : 0.0;
    };
    auto advance = [&](LoopState& st, const LoopState& base, const LoopState& d, double h) {
        for (std::size_t i = 0; i < n; ++i) st.s[i] = base.s[i] + h * d.s[i];
        st.xi = base.xi + h * d.xi;
        st.w = base.w + h * d.w;
    };

    RejectionResponse out;
    out.dt = dt;
    out.gain = plant.gain;
    out.delta_d = delta_d;
    out.r.reserve(4096);
    out.r.push_back(0.0);

    std::vector<double> v_hist;
    v_hist.reserve(4096);
    v_hist.push_back(control(x) + delta_d); // u(0) = 0, the load step is already on

    double last_outside = 0.0;
    LoopState k1, k2, k3, k4, tmp;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const double t = static_cast<double>(step) * dt;

        const double v1 = delayed_input(v_hist, t - plant.delay, dt);
        derivs(x, v1, k1);
        const double v2 = delayed_input(v_hist, t + 0.5 * dt - plant.delay, dt);
        advance(tmp, x, k1, 0.5 * dt);
        derivs(tmp, v2, k2);
        advance(tmp, x, k2, 0.5 * dt);
        derivs(tmp, v2, k3);
        const double v4 = delayed_input(v_hist, t + dt - plant.delay, dt);
        advance(tmp, x, k3, dt);
        derivs(tmp, v4, k4);

        for (std::size_t i = 0; i < n; ++i)
            x.s[i] += dt / 6.0 * (k1.s[i] + 2.0 * k2.s[i] + 2.0 * k3.s[i] + k4.s[i]);
        x.xi += dt / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
        x.w += dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);

        const double t_next = t + dt;
        const double r = x.s[n - 1] / r_norm;
        if (!std::isfinite(r)) throw NumericalFailure("simulate_rejection: state is not finite");
        if (std::abs(r) > policy.blowup_limit) {
            out.unstable = true;
            return out;
        }
        out.r.push_back(r);
        v_hist.push_back(control(x) + delta_d);

        if (std::abs(r) >= policy.settle_band) last_outside = t_next;
        if (t_next - last_outside >= hold) {
            out.converged = true;
            return out;
        }
    }
    return out; // horizon cap reached without settling
}

StepResponse simulate_step(const LagChainPlant& plant, double amplitude, double dt,
                           double settle_band, double cap_factor) {
    plant.validate();
    if (amplitude == 0.0) throw std::domain_error("simulate_step: amplitude must be nonzero");
    if (dt == 0.0) dt = default_step(plant);
    if (!(dt > 0.0)) throw std::domain_error("simulate_step: dt must be > 0");

    double taus[kMaxLags];
    std::size_t n = 0;
    for (double tau : plant.taus)
        if (tau >= dt) taus[n++] = tau;
    if (n == 0) taus[n++] = *std::max_element(plant.taus.begin(), plant.taus.end());

    const double scale = plant.time_scale();
    const double hold = 2.0 * scale;
    const auto max_steps = static_cast<std::size_t>(std::ceil(cap_factor * scale / dt));
    const double y_final = plant.gain * amplitude;
    const double band = settle_band * std::abs(y_final);

    double s[kMaxLags] = {0.0};
    auto input_at = [&](double t) { return t >= plant.delay ? amplitude : 0.0; };
    auto derivs = [&](const double* st, double vd, double* d) {
        double upstream = plant.gain * vd;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = (upstream - st[i]) / taus[i];
            upstream = st[i];
        }
    };

    StepResponse out;
    out.dt = dt;
    out.amplitude = amplitude;
    out.gain = plant.gain;
    out.y.reserve(4096);
    out.y.push_back(0.0);

    double last_outside = 0.0;
    double k1[kMaxLags], k2[kMaxLags], k3[kMaxLags], k4[kMaxLags], tmp[kMaxLags];
    for (std::size_t step = 0; step < max_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        derivs(s, input_at(t), k1);
        const double vm = input_at(t + 0.5 * dt);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        derivs(tmp, vm, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        derivs(tmp, vm, k3);
        const double ve = input_at(t + dt);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
        derivs(tmp, ve, k4);
        for (std::size_t i = 0; i < n; ++i)
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        const double y = s[n - 1];
        if (!std::isfinite(y)) throw NumericalFailure("simulate_step: state is not finite");
        out.y.push_back(y);

        const double t_next = t + dt;
        if (std::abs(y - y_final) > band) last_outside = t_next;
        if (t_next - last_outside >= hold) {
            out.settled = true;
            return out;
        }
    }
    return out;
}

double iae(const RejectionResponse& response) {
    const auto& r = response.r;
    if (r.size() < 2) return 0.0;
    double sum = 0.0;
    for (double v : r) sum += std::abs(v);
    sum -= 0.5 * (std::abs(r.front()) + std::abs(r.back()));
    return sum * response.dt;
}

void require_stable(const RejectionResponse& response) {
    if (response.unstable)
        throw UnstableError("rejection response exceeded the blow-up limit");
}

} // namespace loopgrade
