#include "loopgrade/dataset.hpp"

#include "loopgrade/errors.hpp"
#include "loopgrade/io.hpp"
#include "loopgrade/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace loopgrade {

std::size_t Dataset::ok_count() const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const LabeledSample& s) { return s.ok; }));
}

std::size_t Dataset::nok_count() const { return samples.size() - ok_count(); }

PidTuning apply_multipliers(const PidTuning& ref, double a1, double a2, double a3) {
    PidTuning t = ref;
    t.kr *= a1;
    t.Ti *= a2;
    t.Td *= a3;
    return t;
}

PidTuning perturb_tuning(const PidTuning& ref, RandomStream& rng, double& a1, double& a2,
                         double& a3) {
    auto draw = [&rng] {
        double a = rng.normal(1.0, 0.15);
        while (a <= 0.05) a = rng.normal(1.0, 0.15);
        return a;
    };
    a1 = draw();
    a2 = draw();
    a3 = draw();
    return apply_multipliers(ref, a1, a2, a3);
}

namespace {

double value_at(const RejectionResponse& resp, double t) {
    if (t < 0.0) return 0.0;
    const double x = t / resp.dt;
    const auto j = static_cast<std::size_t>(x);
    if (j + 1 >= resp.r.size()) return 0.0; // settled tail, zero-extended
    const double f = x - static_cast<double>(j);
    return resp.r[j] + f * (resp.r[j + 1] - resp.r[j]);
}

} // namespace

double e_dist(const RejectionResponse& ref_resp, const RejectionResponse& lab_resp) {
    if (ref_resp.r.size() < 2 || !(ref_resp.dt > 0.0))
        throw ZeroReferenceError("e_dist: empty reference");
    const double denom = iae(ref_resp);
    if (denom < 1e-9) throw ZeroReferenceError("e_dist: reference integrates to ~zero");

    const double dt = ref_resp.dt;
    const bool same_grid = lab_resp.dt == dt;
    const double horizon = std::max(ref_resp.horizon(), lab_resp.horizon());
    const auto count = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;

    double num = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r_ref = i < ref_resp.r.size() ? ref_resp.r[i] : 0.0;
        double r_lab;
        if (same_grid)
            r_lab = i < lab_resp.r.size() ? lab_resp.r[i] : 0.0;
        else
            r_lab = value_at(lab_resp, dt * static_cast<double>(i));
        const double diff = std::abs(r_ref - r_lab);
        if (i > 0) num += 0.5 * dt * (prev + diff);
        prev = diff;
    }
    return num / denom;
}

bool label_ok(const Margins& ref_margins, const Margins& cand_margins, double dist) {
    const bool am_ok = cand_margins.Am >= kBandLo * ref_margins.Am &&
                       cand_margins.Am <= kBandHi * ref_margins.Am;
    const bool phi_ok = cand_margins.phi_m_deg >= kBandLo * ref_margins.phi_m_deg &&
                        cand_margins.phi_m_deg <= kBandHi * ref_margins.phi_m_deg;
    return am_ok && phi_ok && dist < kDistLimit;
}

std::optional<LabeledSample> label_sample(const ReferenceEntry& entry, const PidTuning& candidate,
                                          double a1, double a2, double a3) {
    const SopdtModel model = entry.process.denormalize();

    RejectionResponse resp;
    Margins cand_margins;
    try {
        resp = simulate_rejection(model, candidate, 1.0, entry.response_ref.dt);
        cand_margins = margins(model, candidate);
    } catch (const NumericalFailure&) {
        return std::nullopt;
    } catch (const NoCrossoverError&) {
        return std::nullopt;
    }

    LabeledSample sample;
    try {
        sample.features = extract_features(resp);
    } catch (const DegenerateResponseError&) {
        return std::nullopt;
    }

    const double dist = e_dist(entry.response_ref, resp);
    sample.ok = !resp.unstable && label_ok(entry.margins, cand_margins, dist);

    sample.prov.L1 = entry.process.L1;
    sample.prov.L2 = entry.process.L2;
    sample.prov.a1 = a1;
    sample.prov.a2 = a2;
    sample.prov.a3 = a3;
    sample.prov.Am = cand_margins.Am;
    sample.prov.phi_m = cand_margins.phi_m_deg;
    sample.prov.e_dist = dist;
    sample.prov.Am_norm = (cand_margins.Am - entry.margins.Am) / (0.1 * entry.margins.Am);
    sample.prov.phi_m_norm =
        (cand_margins.phi_m_deg - entry.margins.phi_m_deg) / (0.1 * entry.margins.phi_m_deg);
    return sample;
}

namespace {

std::optional<LabeledSample> make_candidate(const ReferenceMesh& mesh, std::uint64_t master,
                                            std::uint64_t index) {
    RandomStream rng(master, index);
    const NormalizedProcess p{rng.uniform(mesh.l1_nodes.front(), mesh.l1_nodes.back()),
                              rng.uniform(mesh.l2_nodes.front(), mesh.l2_nodes.back())};
    const ReferenceEntry entry = interpolate_tuning(mesh, p);
    double a1, a2, a3;
    const PidTuning candidate = perturb_tuning(entry.tuning, rng, a1, a2, a3);
    return label_sample(entry, candidate, a1, a2, a3);
}

constexpr std::size_t kBatch = 64;

} // namespace

Dataset generate_dataset(const ReferenceMesh& mesh, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0 || n_samples % 2 != 0)
        throw std::domain_error("generate_dataset: n_samples must be even and positive");
    const std::size_t quota = n_samples / 2;
    const std::uint64_t master = mix_seed(seed, 0xda7a);
    const std::size_t budget = 50 * n_samples;

    Dataset out;
    out.seed = seed;
    out.samples.reserve(n_samples);
    std::size_t ok = 0, nok = 0;

    std::vector<std::optional<LabeledSample>> batch(kBatch);
    for (std::size_t base = 0; base < budget && (ok < quota || nok < quota); base += kBatch) {
        const std::size_t width = std::min(kBatch, budget - base);
        parallel_for(width, [&](std::size_t b) { batch[b] = make_candidate(mesh, master, base + b); });
        for (std::size_t b = 0; b < width; ++b) {
            if (!batch[b]) continue;
            std::size_t& count = batch[b]->ok ? ok : nok;
            if (count >= quota) continue;
            ++count;
            out.samples.push_back(std::move(*batch[b]));
        }
    }
    if (ok < quota || nok < quota)
        throw BudgetExceededError("generate_dataset: class quota unfilled after " +
                                  std::to_string(budget) + " attempts");
    return out;
}

std::vector<LabeledSample> generate_raw_samples(const ReferenceMesh& mesh, std::size_t count,
                                                std::uint64_t seed) {
    const std::uint64_t master = mix_seed(seed, 0xda7a);
    std::vector<LabeledSample> out;
    out.reserve(count);
    std::vector<std::optional<LabeledSample>> batch(kBatch);
    for (std::size_t base = 0; out.size() < count; base += kBatch) {
        parallel_for(kBatch, [&](std::size_t b) { batch[b] = make_candidate(mesh, master, base + b); });
        for (std::size_t b = 0; b < kBatch && out.size() < count; ++b)
            if (batch[b]) out.push_back(std::move(*batch[b]));
    }
    return out;
}

const std::string& dataset_header() {
    static const std::string header =
        feature_header() + ",label,L1,L2,a1,a2,a3,Am,phim,e_dist";
    return header;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
    std::string out = dataset_header() + "\n";
    for (const LabeledSample& s : dataset.samples) {
        for (double f : s.features) {
            out += format_double(f);
            out += ',';
        }
        out += s.ok ? "OK" : "NOK";
        const double tail[8] = {s.prov.L1, s.prov.L2, s.prov.a1,   s.prov.a2,
                                s.prov.a3, s.prov.Am, s.prov.phi_m, s.prov.e_dist};
        for (double v : tail) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    write_file(path, out);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_dataset_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != dataset_header())
        throw std::runtime_error("read_dataset_csv: header does not match the frozen schema");

    Dataset out;
    std::vector<std::string> cells;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        cells.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != kFeatureCount + 9)
            throw std::runtime_error("read_dataset_csv: wrong column count");

        LabeledSample s;
        for (int i = 0; i < kFeatureCount; ++i) s.features[i] = parse_double(cells[i]);
        const std::string& label = cells[kFeatureCount];
        if (label != "OK" && label != "NOK")
            throw std::runtime_error("read_dataset_csv: bad label '" + label + "'");
        s.ok = label == "OK";
        s.prov.L1 = parse_double(cells[kFeatureCount + 1]);
        s.prov.L2 = parse_double(cells[kFeatureCount + 2]);
        s.prov.a1 = parse_double(cells[kFeatureCount + 3]);
        s.prov.a2 = parse_double(cells[kFeatureCount + 4]);
        s.prov.a3 = parse_double(cells[kFeatureCount + 5]);
        s.prov.Am = parse_double(cells[kFeatureCount + 6]);
        s.prov.phi_m = parse_double(cells[kFeatureCount + 7]);
        s.prov.e_dist = parse_double(cells[kFeatureCount + 8]);
        // Normalized margins are derived quantities and are not persisted.
        s.prov.Am_norm = std::numeric_limits<double>::quiet_NaN();
        s.prov.phi_m_norm = std::numeric_limits<double>::quiet_NaN();
        out.samples.push_back(std::move(s));
    }
    return out;
}

} // namespace loopgrade
