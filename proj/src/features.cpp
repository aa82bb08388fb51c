#include "loopgrade/features.hpp"

#include "loopgrade/errors.hpp"

#include <algorithm>
#include <cmath>

namespace loopgrade {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "F1",  "F2",  "F3",  "F4",  "F5",  "F6",  "F7",  "F8",  "F9",  "F10",
    "F11", "F12", "F13", "F14", "F15", "F16", "F17", "F18", "F19", "F20",
    "F21", "F22", "F23", "F24", "F25", "F26", "F27", "F28", "F29", "F30"};

const std::array<const char*, kFeatureCount> kFeatureLongNames = {
    "MaxPeak",          "MaxPeakTime",     "MinPeak",          "MinPeakTime",
    "MinToMax",         "MaxToMinTime",    "SettlingTime",     "IAE",
    "ISE",              "ITAE",            "IT2AE",            "IAEPos",
    "IAENeg",           "IAENegToPos",     "DecayRatio",       "DecayRatioTime",
    "PeakSettlingTime", "TimePos",         "TimeNeg",          "TimeNegToPos",
    "RisingTime",       "FallingTime",     "RisingToFallingTime", "25%DistRejected",
    "50%DistRejected",  "75%DistRejected", "ZeroCrossingTime", "MaxDiff",
    "MinDiff",          "DiffMaxToMin"};

const std::array<int, kPopularCount> kPopularFeatureIndices = {0,  2,  4,  6,  7,  8,
                                                               9,  10, 14, 15, 27, 28};

const std::string& feature_header() {
    static const std::string header = [] {
        std::string h;
        for (int i = 0; i < kFeatureCount; ++i) {
            if (i) h += ',';
            h += kFeatureNames[i];
        }
        return h;
    }();
    return header;
}

namespace {

constexpr double kPeakTol = 1e-9; // a sample must beat both neighbors by this

/// Time where the segment (t_i, r_i) -> (t_i+dt, r_next) reaches level.
double cross_time(double t_i, double dt, double r_i, double r_next, double level) {
    const double span = r_next - r_i;
    if (span == 0.0) return t_i;
    return t_i + dt * (level - r_i) / span;
}

} // namespace

FeatureVector extract_features(const RejectionResponse& response) {
    const auto& r = response.r;
    const double dt = response.dt;
    const std::size_t count = r.size();
    if (count < 3 || !(dt > 0.0))
        throw DegenerateResponseError("extract_features: trajectory too short");
    const std::size_t last = count - 1;
    auto t_of = [&](std::size_t i) { return dt * static_cast<double>(i); };
    const double horizon = t_of(last);

    std::size_t i_max = 0, i_min = 0;
    for (std::size_t i = 1; i < count; ++i) {
        if (r[i] > r[i_max]) i_max = i;
        if (r[i] < r[i_min]) i_min = i;
    }
    const double peak = r[i_max];
    if (!(peak >= 1e-6))
        throw DegenerateResponseError("extract_features: no excitation (max r < 1e-6)");

    FeatureVector f{};
    f[0] = peak;                                    // F1
    f[1] = t_of(i_max);                             // F2
    f[2] = r[i_min] < 0.0 ? -r[i_min] : 0.0;        // F3
    f[3] = t_of(i_min);                             // F4
    f[4] = f[2] / f[0];                             // F5
    f[5] = f[3] - f[1];                             // F6

    // F7: last sample where the loop is measurably off its resting value.
    double settling = 0.0;
    for (std::size_t i = last + 1; i-- > 0;) {
        if (std::abs(r[i]) >= 0.01) {
            settling = t_of(i);
            break;
        }
    }
    f[6] = settling;

    // F8..F13: trapezoidal integrals; the sign split shares the same rule so
    // the positive and negative lobes add up to the absolute integral.
    double iae = 0.0, ise = 0.0, itae = 0.0, it2ae = 0.0, pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < last; ++i) {
        const double a = r[i], b = r[i + 1];
        const double ta = t_of(i), tb = t_of(i + 1);
        iae += 0.5 * dt * (std::abs(a) + std::abs(b));
        ise += 0.5 * dt * (a * a + b * b);
        itae += 0.5 * dt * (ta * std::abs(a) + tb * std::abs(b));
        it2ae += 0.5 * dt * (ta * ta * std::abs(a) + tb * tb * std::abs(b));
        pos += 0.5 * dt * (std::max(a, 0.0) + std::max(b, 0.0));
        neg += 0.5 * dt * (std::max(-a, 0.0) + std::max(-b, 0.0));
    }
    f[7] = iae;
    f[8] = ise;
    f[9] = itae;
    f[10] = it2ae;
    f[11] = pos;
    f[12] = neg;
    f[13] = pos > 0.0 ? neg / pos : 0.0; // F14

    // F15/F16: second positive peak relative to the first.
    f[14] = 0.0;
    f[15] = 0.0;
    for (std::size_t i = i_max + 1; i + 1 < count; ++i) {
        if (r[i] > 0.0 && r[i] - r[i - 1] > kPeakTol && r[i] - r[i + 1] > kPeakTol) {
            f[14] = r[i] / peak;
            f[15] = t_of(i) - f[1];
            break;
        }
    }

    f[16] = f[6] - f[1]; // F17

    // F18/F19: dwell time on each side of zero, counted per sample.
    std::size_t n_pos = 0, n_neg = 0;
    for (double v : r) {
        if (v > 0.0) ++n_pos;
        else if (v < 0.0) ++n_neg;
    }
    f[17] = dt * static_cast<double>(n_pos);
    f[18] = dt * static_cast<double>(n_neg);
    f[19] = f[17] > 0.0 ? f[18] / f[17] : 0.0; // F20

    // F21: rise through 5% -> 95% of the peak, last crossings before it.
    const double lo = 0.05 * peak, hi = 0.95 * peak;
    double t05 = 0.0, t95 = 0.0;
    for (std::size_t i = i_max; i-- > 0;) {
        if (r[i] <= lo) {
            t05 = cross_time(t_of(i), dt, r[i], r[i + 1], lo);
            break;
        }
    }
    for (std::size_t i = i_max; i-- > 0;) {
        if (r[i] < hi) {
            t95 = cross_time(t_of(i), dt, r[i], r[i + 1], hi);
            break;
        }
    }
    f[20] = t95 - t05;

    // F22: fall through 95% -> 5% after the peak; a truncated fall runs to the
    // horizon, and a response that never leaves 95% has no fall at all.
    double fall = 0.0;
    for (std::size_t i = i_max + 1; i < count; ++i) {
        if (r[i] < hi) {
            const double t_hi = cross_time(t_of(i - 1), dt, r[i - 1], r[i], hi);
            double t_lo = horizon;
            for (std::size_t j = i; j < count; ++j) {
                if (r[j] <= lo) {
                    t_lo = cross_time(t_of(j - 1), dt, r[j - 1], r[j], lo);
                    break;
                }
            }
            fall = t_lo - t_hi;
            break;
        }
    }
    f[21] = fall;
    f[22] = f[21] > 0.0 ? f[20] / f[21] : 0.0; // F23

    // F24..F26: last exit from the {25, 50, 75}% bands (settling semantics).
    const double bands[3] = {0.25 * peak, 0.5 * peak, 0.75 * peak};
    for (int b = 0; b < 3; ++b) {
        double t_exit = 0.0;
        for (std::size_t i = last + 1; i-- > 0;) {
            if (std::abs(r[i]) >= bands[b]) {
                t_exit = t_of(i);
                break;
            }
        }
        f[23 + b] = t_exit;
    }

    // F27: first return to zero after the peak, horizon when there is none.
    double zero_cross = horizon;
    for (std::size_t i = i_max; i + 1 < count; ++i) {
        if (r[i] > 0.0 && r[i + 1] <= 0.0) {
            zero_cross = cross_time(t_of(i), dt, r[i], r[i + 1], 0.0);
            break;
        }
    }
    f[26] = zero_cross;

    // F28/F29: slope extremes by central differences, one-sided at the ends.
    double d_max = (r[1] - r[0]) / dt;
    double d_min = d_max;
    for (std::size_t i = 1; i < last; ++i) {
        const double d = (r[i + 1] - r[i - 1]) / (2.0 * dt);
        d_max = std::max(d_max, d);
        d_min = std::min(d_min, d);
    }
    const double d_end = (r[last] - r[last - 1]) / dt;
    d_max = std::max(d_max, d_end);
    d_min = std::min(d_min, d_end);
    f[27] = d_max;
    f[28] = std::abs(d_min);
    f[29] = f[28] > 0.0 ? f[27] / f[28] : 0.0; // F30

    for (double v : f)
        if (!std::isfinite(v)) throw DegenerateResponseError("extract_features: non-finite value");
    return f;
}

std::array<double, kPopularCount> popular_subset(const FeatureVector& fv) {
    std::array<double, kPopularCount> out{};
    for (int i = 0; i < kPopularCount; ++i) out[i] = fv[kPopularFeatureIndices[i]];
    return out;
}

} // namespace loopgrade
