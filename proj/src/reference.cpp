#include "loopgrade/reference.hpp"

#include "loopgrade/errors.hpp"
#include "loopgrade/io.hpp"
#include "loopgrade/nelder_mead.hpp"
#include "loopgrade/parallel.hpp"
#include "loopgrade/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace loopgrade {

namespace {

using nlohmann::json;

constexpr double kMarginWeight = 1e4;

double penalized_objective(const SopdtModel& model, const std::vector<double>& z) {
    PidTuning tuning{std::exp(z[0]), std::exp(z[1]), std::exp(z[2]), 10.0};
    double penalty = 0.0;
    try {
        const Margins m = margins(model, tuning);
        const double am_gap = std::max(0.0, 2.5 - m.Am);
        const double phi_gap = std::max(0.0, (60.0 - m.phi_m_deg) / 60.0);
        penalty = kMarginWeight * (am_gap * am_gap + phi_gap * phi_gap);
    } catch (const NoCrossoverError&) {
        return 1e8;
    }
    RejectionResponse resp;
    try {
        resp = simulate_rejection(model, tuning);
    } catch (const NumericalFailure&) {
        return 1e8;
    }
    if (resp.unstable) {
        // Order divergent candidates by how long they survived.
        return 1e5 * (1.0 + 1.0 / (1.0 + resp.horizon()));
    }
    double cost = iae(resp) + penalty;
    if (!resp.converged) cost += 100.0 * (std::abs(resp.r.back()) + 0.01);
    return cost;
}

std::vector<double> heuristic_start(const SopdtModel& m) {
    const double kr0 = m.tau1 / (m.k * (m.tau0 + m.tau2));
    const double ti0 = m.tau1 + 0.5 * m.tau2;
    const double td0 = m.tau1 * m.tau2 / (m.tau1 + m.tau2);
    return {std::log(kr0), std::log(ti0), std::log(td0)};
}

/// Grid nodes as exact tenths so coordinates compare equal to literals.
std::vector<double> tenth_axis(double lo, double hi, const char* name) {
    const long a = std::lround(lo * 10.0), b = std::lround(hi * 10.0);
    if (std::abs(lo * 10.0 - static_cast<double>(a)) > 1e-9 ||
        std::abs(hi * 10.0 - static_cast<double>(b)) > 1e-9 || b <= a)
        throw std::domain_error(std::string("build_mesh: ") + name +
                                " range must be 0.1-aligned with hi > lo");
    std::vector<double> nodes;
    for (long i = a; i <= b; ++i) nodes.push_back(static_cast<double>(i) / 10.0);
    return nodes;
}

double catmull_rom(double p0, double p1, double p2, double p3, double s) {
    return p1 + 0.5 * s *
                    (p2 - p0 +
                     s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)));
}

/// Value at index i with linear ghost extension beyond the ends.
double ghosted(const std::vector<double>& v, long i) {
    const long n = static_cast<long>(v.size());
    if (i < 0) return 2.0 * v[0] - v[1];
    if (i >= n) return 2.0 * v[n - 1] - v[n - 2];
    return v[static_cast<std::size_t>(i)];
}

struct CellPos {
    std::size_t idx; // lower node of the containing cell
    double s;        // position inside the cell, [0, 1]
};

CellPos locate(const std::vector<double>& nodes, double x) {
    std::size_t i = 0;
    while (i + 2 < nodes.size() && x >= nodes[i + 1]) ++i;
    return {i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

double interp2(const std::vector<double>& l1_nodes, const std::vector<double>& l2_nodes,
               const std::vector<double>& values, double x1, double x2) {
    const CellPos c1 = locate(l1_nodes, x1);
    const CellPos c2 = locate(l2_nodes, x2);
    const long n2 = static_cast<long>(l2_nodes.size());
    double rows[4];
    for (long m = 0; m < 4; ++m) {
        const long i1 = static_cast<long>(c1.idx) + m - 1;
        std::vector<double> line(l2_nodes.size());
        for (long j = 0; j < n2; ++j) {
            const long i1c = std::clamp(i1, 0L, static_cast<long>(l1_nodes.size()) - 1);
            double v = values[static_cast<std::size_t>(i1c) * l2_nodes.size() +
                              static_cast<std::size_t>(j)];
            if (i1 < 0 || i1 >= static_cast<long>(l1_nodes.size())) {
                // Linear ghost along L1: mirror through the edge row.
                const long edge = i1 < 0 ? 0 : static_cast<long>(l1_nodes.size()) - 1;
                const long inner = i1 < 0 ? 1 : edge - 1;
                v = 2.0 * values[static_cast<std::size_t>(edge) * l2_nodes.size() +
                                 static_cast<std::size_t>(j)] -
                    values[static_cast<std::size_t>(inner) * l2_nodes.size() +
                           static_cast<std::size_t>(j)];
            }
            line[static_cast<std::size_t>(j)] = v;
        }
        rows[m] = catmull_rom(ghosted(line, static_cast<long>(c2.idx) - 1),
                              ghosted(line, static_cast<long>(c2.idx)),
                              ghosted(line, static_cast<long>(c2.idx) + 1),
                              ghosted(line, static_cast<long>(c2.idx) + 2), c2.s);
    }
    return catmull_rom(rows[0], rows[1], rows[2], rows[3], c1.s);
}

} // namespace

ReferenceEntry optimize_reference(const NormalizedProcess& p, std::uint64_t seed) {
    if (!p.in_design_range())
        throw std::domain_error("optimize_reference: process outside the design range");
    const SopdtModel model = p.denormalize();
    const auto objective = [&](const std::vector<double>& z) {
        return penalized_objective(model, z);
    };

    const std::vector<double> z0 = heuristic_start(model);
    RandomStream rng(seed, 0x7e5);
    NelderMeadOptions opts;
    opts.max_iter = 300;
    opts.rel_tol = 1e-3;
    opts.init_step = 0.3;

    std::vector<double> best_z;
    double best_f = std::numeric_limits<double>::infinity();
    const double jitter = std::log(3.0);
    for (int start = 0; start < 5; ++start) {
        std::vector<double> z = z0;
        if (start > 0)
            for (double& c : z) c += rng.uniform(-jitter, jitter);
        const NelderMeadResult res = nelder_mead(objective, z, opts);
        if (res.fx < best_f) {
            best_f = res.fx;
            best_z = res.x;
        }
    }

    ReferenceEntry entry;
    entry.process = p;
    entry.tuning = {std::exp(best_z[0]), std::exp(best_z[1]), std::exp(best_z[2]), 10.0};
    entry.margins = margins(model, entry.tuning);
    entry.response_ref = simulate_rejection(model, entry.tuning);
    entry.iae_ref = iae(entry.response_ref);

    const bool feasible = entry.margins.Am >= kAmFloor && entry.margins.phi_m_deg >= kPhiFloor &&
                          entry.response_ref.converged && !entry.response_ref.unstable;
    if (!feasible)
        throw InfeasibleError("optimize_reference: no feasible tuning at L1=" +
                              format_double(p.L1) + " L2=" + format_double(p.L2));
    return entry;
}

ReferenceMesh build_mesh(std::uint64_t seed, double l1_lo, double l1_hi, double l2_lo,
                         double l2_hi) {
    ReferenceMesh mesh;
    mesh.seed = seed;
    mesh.l1_nodes = tenth_axis(l1_lo, l1_hi, "L1");
    mesh.l2_nodes = tenth_axis(l2_lo, l2_hi, "L2");
    mesh.entries.resize(mesh.l1_nodes.size() * mesh.l2_nodes.size());

    parallel_for(mesh.entries.size(), [&](std::size_t idx) {
        const std::size_t i1 = idx / mesh.l2_nodes.size();
        const std::size_t i2 = idx % mesh.l2_nodes.size();
        const NormalizedProcess p{mesh.l1_nodes[i1], mesh.l2_nodes[i2]};
        mesh.entries[idx] = optimize_reference(p, mix_seed(seed, 0x6d657368 + idx));
    });
    return mesh;
}

ReferenceEntry interpolate_tuning(const ReferenceMesh& mesh, const NormalizedProcess& p) {
    if (mesh.l1_nodes.size() < 2 || mesh.l2_nodes.size() < 2)
        throw std::domain_error("interpolate_tuning: mesh needs at least 2x2 nodes");
    if (p.L1 < mesh.l1_nodes.front() || p.L1 > mesh.l1_nodes.back() ||
        p.L2 < mesh.l2_nodes.front() || p.L2 > mesh.l2_nodes.back())
        throw OutOfRangeError("interpolate_tuning: (L1,L2) outside the mesh range");

    const std::size_t n = mesh.entries.size();
    std::vector<double> kr(n), ti(n), td(n);
    for (std::size_t i = 0; i < n; ++i) {
        kr[i] = mesh.entries[i].tuning.kr;
        ti[i] = mesh.entries[i].tuning.Ti;
        td[i] = mesh.entries[i].tuning.Td;
    }

    ReferenceEntry entry;
    entry.process = p;
    entry.tuning = {interp2(mesh.l1_nodes, mesh.l2_nodes, kr, p.L1, p.L2),
                    interp2(mesh.l1_nodes, mesh.l2_nodes, ti, p.L1, p.L2),
                    interp2(mesh.l1_nodes, mesh.l2_nodes, td, p.L1, p.L2), 10.0};
    entry.tuning.validate();

    const SopdtModel model = p.denormalize();
    entry.margins = margins(model, entry.tuning);
    entry.response_ref = simulate_rejection(model, entry.tuning);
    entry.iae_ref = iae(entry.response_ref);
    return entry;
}

PidTuning denormalize_tuning(const PidTuning& canonical, const SopdtModel& physical) {
    physical.validate();
    PidTuning t = canonical;
    t.kr = canonical.kr / physical.k;
    t.Ti = canonical.Ti * physical.tau1;
    t.Td = canonical.Td * physical.tau1;
    return t;
}

namespace {

std::filesystem::path responses_dir(const std::filesystem::path& json_path) {
    auto dir = json_path;
    dir.replace_extension();
    dir += "_responses";
    return dir;
}

std::string node_csv_name(std::size_t i1, std::size_t i2) {
    return "node_" + std::to_string(i1) + "_" + std::to_string(i2) + ".csv";
}

} // namespace

void save_mesh(const ReferenceMesh& mesh, const std::filesystem::path& json_path) {
    const auto resp_dir = responses_dir(json_path);
    std::filesystem::create_directories(resp_dir);

    json root;
    root["format"] = kMeshFormat;
    root["seed"] = mesh.seed;
    root["l1_nodes"] = mesh.l1_nodes;
    root["l2_nodes"] = mesh.l2_nodes;
    json entries = json::array();
    for (std::size_t i1 = 0; i1 < mesh.l1_nodes.size(); ++i1) {
        for (std::size_t i2 = 0; i2 < mesh.l2_nodes.size(); ++i2) {
            const ReferenceEntry& e = mesh.at(i1, i2);
            json je;
            je["L1"] = e.process.L1;
            je["L2"] = e.process.L2;
            je["kr"] = e.tuning.kr;
            je["Ti"] = e.tuning.Ti;
            je["Td"] = e.tuning.Td;
            je["N"] = e.tuning.N;
            je["Am"] = e.margins.Am;
            je["phi_m_deg"] = e.margins.phi_m_deg;
            je["omega_gc"] = e.margins.omega_gc;
            je["omega_pc"] = e.margins.omega_pc;
            je["iae"] = e.iae_ref;
            je["dt"] = e.response_ref.dt;
            je["converged"] = e.response_ref.converged;
            je["response_csv"] = resp_dir.filename().string() + "/" + node_csv_name(i1, i2);
            entries.push_back(je);
            write_response_csv(resp_dir / node_csv_name(i1, i2), e.response_ref);
        }
    }
    root["entries"] = entries;
    write_file(json_path, root.dump(2) + "\n");
}

ReferenceMesh load_mesh(const std::filesystem::path& json_path) {
    const json root = json::parse(read_file(json_path));
    if (root.at("format").get<std::string>() != kMeshFormat)
        throw std::runtime_error("load_mesh: unknown format tag");

    ReferenceMesh mesh;
    mesh.seed = root.at("seed").get<std::uint64_t>();
    mesh.l1_nodes = root.at("l1_nodes").get<std::vector<double>>();
    mesh.l2_nodes = root.at("l2_nodes").get<std::vector<double>>();
    const auto& entries = root.at("entries");
    if (entries.size() != mesh.l1_nodes.size() * mesh.l2_nodes.size())
        throw std::runtime_error("load_mesh: entry count does not match the grid");

    mesh.entries.resize(entries.size());
    const auto base_dir = json_path.has_parent_path() ? json_path.parent_path()
                                                      : std::filesystem::path(".");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const json& je = entries[i];
        ReferenceEntry e;
        e.process = {je.at("L1").get<double>(), je.at("L2").get<double>()};
        e.tuning = {je.at("kr").get<double>(), je.at("Ti").get<double>(),
                    je.at("Td").get<double>(), je.at("N").get<double>()};
        e.margins.Am = je.at("Am").get<double>();
        e.margins.phi_m_deg = je.at("phi_m_deg").get<double>();
        e.margins.omega_gc = je.at("omega_gc").get<double>();
        e.margins.omega_pc = je.at("omega_pc").get<double>();
        e.iae_ref = je.at("iae").get<double>();
        const TimeSeries ts = read_series_csv(base_dir / je.at("response_csv").get<std::string>());
        e.response_ref.dt = je.at("dt").get<double>();
        e.response_ref.r = ts.v;
        e.response_ref.gain = 1.0;
        e.response_ref.delta_d = 1.0;
        e.response_ref.converged = je.at("converged").get<bool>();
        mesh.entries[i] = e;
    }
    return mesh;
}

} // namespace loopgrade
