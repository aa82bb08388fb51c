#pragma once

#include "loopgrade/features.hpp"
#include "loopgrade/reference.hpp"
#include "loopgrade/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace loopgrade {

/// Acceptance band on margins (relative to the reference) and the distance
/// threshold of the OK definition.
inline constexpr double kBandLo = 0.9;
inline constexpr double kBandHi = 1.1;
inline constexpr double kDistLimit = 0.1;

struct SampleProvenance {
    double L1 = 0.0, L2 = 0.0;
    double a1 = 1.0, a2 = 1.0, a3 = 1.0; // tuning multipliers actually applied
    double Am = 0.0, phi_m = 0.0, e_dist = 0.0;
    double Am_norm = 0.0, phi_m_norm = 0.0; // (x - x_ref)/(0.1 x_ref); in [-1,1] iff in band
};

struct LabeledSample {
    FeatureVector features{};
    bool ok = false;
    SampleProvenance prov;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    std::uint64_t seed = 0;

    std::size_t ok_count() const;
    std::size_t nok_count() const;
};

/// ref with each of kr, Ti, Td multiplied by the given factors.
PidTuning apply_multipliers(const PidTuning& ref, double a1, double a2, double a3);

/// Multipliers drawn independently from N(1, 0.0225); draws <= 0.05 are
/// redrawn, not clamped. The factors used are reported through a1..a3.
PidTuning perturb_tuning(const PidTuning& ref, RandomStream& rng, double& a1, double& a2,
                         double& a3);

/// Normalized trajectory distance: integral |r_ref - r_lab| dt divided by
/// integral |r_ref| dt, over the longer horizon with the shorter trajectory
/// zero-extended. Responses on a different grid are resampled onto the
/// reference grid by linear interpolation. Throws ZeroReferenceError when
/// the reference integrates below 1e-9.
double e_dist(const RejectionResponse& ref_resp, const RejectionResponse& lab_resp);

/// The OK definition: both margins within [0.9, 1.1] of the reference values
/// and e_dist strictly below 0.1.
bool label_ok(const Margins& ref_margins, const Margins& cand_margins, double dist);

/// Simulates the candidate tuning on the entry's process, computes margins,
/// e_dist against the entry's reference response, extracts features, and
/// labels. Unstable candidates are NOK with features over the truncated
/// horizon. Returns nullopt when no usable feature vector exists (the caller
/// regenerates); simulator failures never leak into a dataset.
std::optional<LabeledSample> label_sample(const ReferenceEntry& entry,
                                          const PidTuning& candidate, double a1 = 1.0,
                                          double a2 = 1.0, double a3 = 1.0);

/// Balanced dataset: draws (L1, L2) uniformly over the mesh range,
/// interpolates the reference, perturbs, labels, and rejection-samples until
/// each class holds n_samples/2. Sample generation is a parallel map over
/// per-index random streams consumed in index order, so the output never
/// depends on thread count. Throws BudgetExceeded after 50 * n_samples
/// attempts.
Dataset generate_dataset(const ReferenceMesh& mesh, std::size_t n_samples, std::uint64_t seed);

/// Unbalanced stream of the first `count` usable samples in attempt order;
/// used for labeling-consistency statistics.
std::vector<LabeledSample> generate_raw_samples(const ReferenceMesh& mesh, std::size_t count,
                                                std::uint64_t seed);

/// CSV persistence with the frozen header
/// "F1,...,F30,label,L1,L2,a1,a2,a3,Am,phim,e_dist". Numbers are written in
/// shortest round-trip form, so write -> read -> write is byte-identical.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

const std::string& dataset_header();

} // namespace loopgrade
