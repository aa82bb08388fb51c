#pragma once

#include "loopgrade/simulate.hpp"

#include <array>
#include <string>

namespace loopgrade {

inline constexpr int kFeatureCount = 30;
inline constexpr int kPopularCount = 12;

/// Control-performance indicators in frozen order F1..F30.
using FeatureVector = std::array<double, kFeatureCount>;

/// Short names "F1".."F30"; the serialized header is their comma join.
extern const std::array<const char*, kFeatureCount> kFeatureNames;

/// Descriptive names for reports (MaxPeak, SettlingTime, ...).
extern const std::array<const char*, kFeatureCount> kFeatureLongNames;

/// Zero-based indices of the popular subset
/// {F1, F3, F5, F7, F8, F9, F10, F11, F15, F16, F28, F29}.
extern const std::array<int, kPopularCount> kPopularFeatureIndices;

/// Frozen CSV header "F1,F2,...,F30".
const std::string& feature_header();

/// Computes the 30 indicators from a normalized rejection trajectory.
/// Degenerate-shape conventions: no undershoot -> F3 = F5 = 0 and F4 is the
/// global-minimum time regardless of sign; no second positive peak ->
/// F15 = F16 = 0; no zero crossing after the peak -> F27 = horizon; ratio
/// features with a zero denominator -> 0. Unsettled (truncated) responses are
/// evaluated over the stored horizon.
/// Throws DegenerateResponseError when max r < 1e-6.
FeatureVector extract_features(const RejectionResponse& response);

/// Projection onto the popular subset, order-stable.
std::array<double, kPopularCount> popular_subset(const FeatureVector& fv);

} // namespace loopgrade
