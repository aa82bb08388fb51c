#pragma once

#include "loopgrade/errors.hpp"

namespace loopgrade {

struct NormalizedProcess;

/// Second-order-plus-dead-time process k*exp(-tau0*s) / ((tau1*s+1)(tau2*s+1)).
/// Convention: tau1 >= tau2 names the dominant lag.
struct SopdtModel {
    double k = 1.0;
    double tau1 = 1.0;
    double tau2 = 1.0;
    double tau0 = 1.0;

    void validate() const;
    NormalizedProcess normalized() const;
};

/// Shape coordinates L1 = tau0/(tau1+tau0), L2 = tau2/tau1. Dynamics depend on
/// (L1, L2) only, up to time and gain scaling.
struct NormalizedProcess {
    double L1 = 0.0;
    double L2 = 0.0;

    /// Design range covered by the reference mesh.
    static constexpr double l1_min = 0.1, l1_max = 0.6;
    static constexpr double l2_min = 0.1, l2_max = 1.0;

    bool in_design_range() const {
        return L1 >= l1_min && L1 <= l1_max && L2 >= l2_min && L2 <= l2_max;
    }

    /// Canonical representative: tau1 = 1, k = 1, tau2 = L2, tau0 = L1/(1-L1).
    SopdtModel denormalize() const;
};

/// Ideal parallel PID with first-order derivative filter Tf = Td/N:
///   u = kr * (e + (1/Ti) * integral(e) + Td * d/dt(filtered e)).
struct PidTuning {
    double kr = 1.0;
    double Ti = 1.0;
    double Td = 0.0;
    double N = 10.0;

    double Tf() const { return Td > 0.0 ? Td / N : 0.0; }
    void validate() const;
};

inline void SopdtModel::validate() const {
    if (!(k > 0.0)) throw std::domain_error("SopdtModel: k must be > 0");
    if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw std::domain_error("SopdtModel: lags must be > 0");
    if (!(tau0 > 0.0)) throw std::domain_error("SopdtModel: delay must be > 0");
    if (tau2 > tau1) throw std::domain_error("SopdtModel: requires tau1 >= tau2");
}

inline NormalizedProcess SopdtModel::normalized() const {
    validate();
    return {tau0 / (tau1 + tau0), tau2 / tau1};
}

inline SopdtModel NormalizedProcess::denormalize() const {
    if (!(L1 > 0.0) || !(L1 < 1.0)) throw std::domain_error("NormalizedProcess: L1 must be in (0,1)");
    if (!(L2 > 0.0) || !(L2 <= 1.0)) throw std::domain_error("NormalizedProcess: L2 must be in (0,1]");
    return {1.0, 1.0, L2, L1 / (1.0 - L1)};
}

inline void PidTuning::validate() const {
    if (!(kr > 0.0)) throw std::domain_error("PidTuning: kr must be > 0");
    if (!(Ti > 0.0)) throw std::domain_error("PidTuning: Ti must be > 0");
    if (Td < 0.0) throw std::domain_error("PidTuning: Td must be >= 0");
    if (!(N > 0.0)) throw std::domain_error("PidTuning: N must be > 0");
}

} // namespace loopgrade
