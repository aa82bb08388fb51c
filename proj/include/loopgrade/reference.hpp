#pragma once

#include "loopgrade/frequency.hpp"
#include "loopgrade/process.hpp"
#include "loopgrade/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace loopgrade {

/// Constraint floors accepted at the optimum; the nominal constraints are
/// Am >= 2.5 and phi_m >= 60 deg, the slack absorbs bisection error.
inline constexpr double kAmFloor = 2.5 - 0.01;
inline constexpr double kPhiFloor = 60.0 - 0.1;

/// One tuned process: the IAE-optimal PID under the margin constraints,
/// together with the margins and rejection response it was scored on.
struct ReferenceEntry {
    NormalizedProcess process;
    PidTuning tuning;
    Margins margins;
    double iae_ref = 0.0;
    RejectionResponse response_ref;
};

/// Regular (L1, L2) grid of reference entries, 0.1-spaced on both axes.
/// The full design mesh is 6 x 10 = 60 entries.
struct ReferenceMesh {
    std::vector<double> l1_nodes;
    std::vector<double> l2_nodes;
    std::vector<ReferenceEntry> entries; // row-major, L1 index slow
    std::uint64_t seed = 0;

    const ReferenceEntry& at(std::size_t i1, std::size_t i2) const {
        return entries[i1 * l2_nodes.size() + i2];
    }
    ReferenceEntry& at(std::size_t i1, std::size_t i2) {
        return entries[i1 * l2_nodes.size() + i2];
    }
};

/// Solves the constrained IAE minimization for one normalized process:
/// minimize IAE subject to Am >= 2.5, phi_m >= 60 deg, via Nelder-Mead on a
/// penalized objective in log-parameter space, one heuristic start plus four
/// seeded restarts. Throws InfeasibleError when no restart ends feasible.
ReferenceEntry optimize_reference(const NormalizedProcess& p, std::uint64_t seed);

/// Optimizes every node of the 0.1-spaced grid spanned by the given ranges
/// (defaults: the full design range). Nodes are independent and run through
/// parallel_for; per-node seeds are split from the mesh seed, so the result
/// is identical at any thread count.
ReferenceMesh build_mesh(std::uint64_t seed, double l1_lo = NormalizedProcess::l1_min,
                         double l1_hi = NormalizedProcess::l1_max,
                         double l2_lo = NormalizedProcess::l2_min,
                         double l2_hi = NormalizedProcess::l2_max);

/// Reference entry for an off-grid process: kr, Ti, Td are interpolated
/// independently by tensor-product Catmull-Rom over the grid (edge ghosts by
/// linear extension), then margins, IAE, and the reference response are
/// recomputed by simulation, never interpolated. Reproduces node entries
/// exactly at grid coordinates. Throws OutOfRangeError outside the mesh.
ReferenceEntry interpolate_tuning(const ReferenceMesh& mesh, const NormalizedProcess& p);

/// Maps a tuning designed for the canonical unit-gain, unit-lag form of a
/// process onto the physical process: gains divide by k, times scale by
/// tau1. The loop transfer function, margins, and normalized response are
/// unchanged (time-stretched by tau1).
PidTuning denormalize_tuning(const PidTuning& canonical, const SopdtModel& physical);

/// Mesh persistence: one JSON file plus a sibling "<stem>_responses/"
/// directory holding each node's reference response CSV. Writing twice from
/// the same mesh produces byte-identical files.
void save_mesh(const ReferenceMesh& mesh, const std::filesystem::path& json_path);
ReferenceMesh load_mesh(const std::filesystem::path& json_path);

/// Format tag embedded in mesh files and downstream reports.
inline constexpr const char* kMeshFormat = "loopgrade-mesh-v1";

} // namespace loopgrade
