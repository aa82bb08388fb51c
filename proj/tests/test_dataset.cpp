#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/dataset.hpp"
#include "loopgrade/io.hpp"

#include <cmath>
#include <filesystem>

namespace fs = std::filesystem;
using namespace loopgrade;

namespace {

RejectionResponse exp_response(double dt, double horizon) {
    RejectionResponse resp;
    resp.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
    resp.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) resp.r[i] = std::exp(-dt * static_cast<double>(i));
    resp.converged = true;
    return resp;
}

// Miniature mesh with one shared, honestly simulated tuning per node, so
// labeling sees self-consistent margins and responses without running the
// full reference optimization.
ReferenceMesh mini_mesh(const PidTuning& tuning) {
    ReferenceMesh mesh;
    mesh.l1_nodes = {0.1, 0.2};
    mesh.l2_nodes = {0.1, 0.2};
    mesh.seed = 3;
    for (const double l1 : mesh.l1_nodes)
        for (const double l2 : mesh.l2_nodes) {
            ReferenceEntry e;
            e.process = {l1, l2};
            e.tuning = tuning;
            e.margins = margins(e.process.denormalize(), e.tuning);
            e.response_ref = simulate_rejection(e.process.denormalize(), e.tuning);
            e.iae_ref = iae(e.response_ref);
            mesh.entries.push_back(std::move(e));
        }
    return mesh;
}

const PidTuning kMild{0.8, 1.0, 0.1, 10.0};

} // namespace

TEST_CASE("distance between a response and its 1.1-scaled copy is exactly 0.1") {
    const RejectionResponse ref = exp_response(1e-3, 10.0);
    RejectionResponse lab = ref;
    for (double& v : lab.r) v *= 1.1;
    CHECK(std::abs(e_dist(ref, lab) - 0.1) < 1e-12);
}

TEST_CASE("distance resamples trajectories recorded on a different grid") {
    const RejectionResponse ref = exp_response(1e-3, 10.0);

    RejectionResponse coarse;
    coarse.dt = 2e-3;
    coarse.r.resize(ref.r.size() / 2 + 1);
    for (std::size_t i = 0; i < coarse.r.size(); ++i) coarse.r[i] = 1.1 * ref.r[2 * i];
    CHECK(std::abs(e_dist(ref, coarse) - 0.1) < 1e-4);

    for (std::size_t i = 0; i < coarse.r.size(); ++i) coarse.r[i] = ref.r[2 * i];
    CHECK(e_dist(ref, coarse) < 1e-4);
}

TEST_CASE("a shorter candidate is zero-extended over the reference horizon") {
    const RejectionResponse ref = exp_response(1e-3, 10.0);
    RejectionResponse lab = ref;
    lab.r.resize(5001); // truncate at t = 5
    for (double& v : lab.r) v *= 1.1;
    // 0.1*(1-e^-5) + (e^-5 - e^-10), normalized by 1 - e^-10
    const double want = (0.1 * (1.0 - std::exp(-5.0)) + std::exp(-5.0) - std::exp(-10.0)) /
                        (1.0 - std::exp(-10.0));
    CHECK(std::abs(e_dist(ref, lab) - want) < 1e-3);
}

TEST_CASE("a vanishing reference trajectory cannot anchor a distance") {
    RejectionResponse zero;
    zero.dt = 0.01;
    zero.r.assign(200, 0.0);
    CHECK_THROWS_AS(e_dist(zero, zero), ZeroReferenceError);
}

TEST_CASE("verdict band is inclusive on margins and strict on distance") {
    const Margins ref{2.5, 60.0, 1.0, 2.0};
    const auto ok = [&](double am, double phi, double dist) {
        return label_ok(ref, Margins{am, phi, 1.0, 2.0}, dist);
    };
    CHECK(ok(2.5, 60.0, 0.0));
    CHECK(ok(2.2501, 60.0, 0.05));
    CHECK(ok(2.7499, 60.0, 0.05));
    CHECK(ok(2.5, 54.01, 0.05));
    CHECK(ok(2.5, 65.99, 0.05));
    CHECK_FALSE(ok(2.2499, 60.0, 0.0));
    CHECK_FALSE(ok(2.7501, 60.0, 0.0));
    CHECK_FALSE(ok(2.5, 53.99, 0.0));
    CHECK_FALSE(ok(2.5, 66.01, 0.0));
    CHECK_FALSE(ok(2.5, 60.0, 0.1)); // strictly below the limit only
    CHECK(ok(2.5, 60.0, 0.0999));
}

TEST_CASE("tuning multipliers are near-unit gaussians with a redraw floor") {
    RandomStream rng(7);
    const PidTuning ref{2.0, 1.5, 0.4, 10.0};
    const std::size_t n = 20000;
    double sum1 = 0.0, sumsq1 = 0.0, min_a = 1e9;
    for (std::size_t i = 0; i < n; ++i) {
        double a1 = 0.0, a2 = 0.0, a3 = 0.0;
        const PidTuning t = perturb_tuning(ref, rng, a1, a2, a3);
        CHECK(t.kr == ref.kr * a1);
        CHECK(t.Ti == ref.Ti * a2);
        CHECK(t.Td == ref.Td * a3);
        CHECK(t.N == ref.N);
        for (const double a : {a1, a2, a3}) min_a = std::min(min_a, a);
        sum1 += a1;
        sumsq1 += a1 * a1;
    }
    CHECK(min_a > 0.05);
    const double mean = sum1 / static_cast<double>(n);
    const double sdev = std::sqrt(sumsq1 / static_cast<double>(n) - mean * mean);
    CHECK(std::abs(mean - 1.0) < 0.005);
    CHECK(sdev > 0.14);
    CHECK(sdev < 0.16);
}

TEST_CASE("labeling the reference tuning itself is OK; a hot copy is not") {
    const ReferenceMesh mesh = mini_mesh(kMild);
    const ReferenceEntry& entry = mesh.at(0, 1);

    const auto same = label_sample(entry, entry.tuning);
    REQUIRE(same.has_value());
    CHECK(same->ok);
    CHECK(same->prov.e_dist < 0.01);
    CHECK(std::abs(same->prov.Am_norm) < 1e-6);
    CHECK(std::abs(same->prov.phi_m_norm) < 1e-6);

    const PidTuning hot = apply_multipliers(entry.tuning, 3.0, 1.0, 1.0);
    const auto bad = label_sample(entry, hot, 3.0, 1.0, 1.0);
    REQUIRE(bad.has_value());
    CHECK_FALSE(bad->ok);
    CHECK(bad->prov.a1 == 3.0);
}

TEST_CASE("balanced generation is exact, in-range, and seed-deterministic") {
    const ReferenceMesh mesh = mini_mesh(kMild);
    const Dataset d1 = generate_dataset(mesh, 60, 11);
    CHECK(d1.samples.size() == 60);
    CHECK(d1.ok_count() == 30);
    CHECK(d1.nok_count() == 30);
    for (const LabeledSample& s : d1.samples) {
        CHECK(s.prov.L1 >= 0.1);
        CHECK(s.prov.L1 <= 0.2);
        CHECK(s.prov.L2 >= 0.1);
        CHECK(s.prov.L2 <= 0.2);
        CHECK(s.prov.a1 > 0.05);
        CHECK(s.prov.a2 > 0.05);
        CHECK(s.prov.a3 > 0.05);
        for (const double v : s.features) CHECK(std::isfinite(v));
        // The verdict must agree with the recorded evidence.
        const bool in_band = std::abs(s.prov.Am_norm) <= 1.0 &&
                             std::abs(s.prov.phi_m_norm) <= 1.0;
        CHECK(s.ok == (in_band && s.prov.e_dist < kDistLimit));
    }

    const fs::path dir = fs::temp_directory_path() / "loopgrade_test_dataset";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_dataset_csv(dir / "a.csv", d1);
    write_dataset_csv(dir / "b.csv", generate_dataset(mesh, 60, 11));
    CHECK(fnv1a_file(dir / "a.csv") == fnv1a_file(dir / "b.csv"));
    write_dataset_csv(dir / "c.csv", generate_dataset(mesh, 60, 12));
    CHECK(fnv1a_file(dir / "a.csv") != fnv1a_file(dir / "c.csv"));
}

TEST_CASE("dataset CSV round-trips values and bytes") {
    const ReferenceMesh mesh = mini_mesh(kMild);
    const Dataset d = generate_dataset(mesh, 20, 5);

    const fs::path dir = fs::temp_directory_path() / "loopgrade_test_dataset_csv";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path path = dir / "d.csv";
    write_dataset_csv(path, d);

    const Dataset back = read_dataset_csv(path);
    REQUIRE(back.samples.size() == d.samples.size());
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        CHECK(back.samples[i].features == d.samples[i].features);
        CHECK(back.samples[i].ok == d.samples[i].ok);
        CHECK(back.samples[i].prov.L1 == d.samples[i].prov.L1);
        CHECK(back.samples[i].prov.a2 == d.samples[i].prov.a2);
        CHECK(back.samples[i].prov.e_dist == d.samples[i].prov.e_dist);
    }

    const std::uint64_t first = fnv1a_file(path);
    write_dataset_csv(path, back);
    CHECK(fnv1a_file(path) == first);

    CHECK(dataset_header() == feature_header() + ",label,L1,L2,a1,a2,a3,Am,phim,e_dist");
}

TEST_CASE("raw sample stream is reproducible and unbalanced by construction") {
    const ReferenceMesh mesh = mini_mesh(kMild);
    const auto raw1 = generate_raw_samples(mesh, 40, 9);
    const auto raw2 = generate_raw_samples(mesh, 40, 9);
    REQUIRE(raw1.size() == 40);
    REQUIRE(raw2.size() == 40);
    for (std::size_t i = 0; i < raw1.size(); ++i) {
        CHECK(raw1[i].features == raw2[i].features);
        CHECK(raw1[i].ok == raw2[i].ok);
    }
}

TEST_CASE("an impossible OK quota exhausts the attempt budget honestly") {
    // A reference right at the stability edge: every perturbation is unstable
    // or far outside the band, so the OK class can never fill.
    const ReferenceMesh mesh = mini_mesh(PidTuning{20.0, 0.05, 0.0, 10.0});
    CHECK_THROWS_AS(generate_dataset(mesh, 10, 1), BudgetExceededError);
}
