#include "loopgrade/classifiers.hpp"

#include "loopgrade/io.hpp"
#include "loopgrade/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace loopgrade {

namespace {

using nlohmann::json;

double hp_get(const Hyperparams& hp, const std::string& name, double fallback) {
    const auto it = hp.find(name);
    return it == hp.end() ? fallback : it->second;
}

int hp_int(const Hyperparams& hp, const std::string& name, int fallback) {
    return static_cast<int>(std::lround(hp_get(hp, name, fallback)));
}

/// Row-major training matrix restricted to the model's feature columns.
struct Table {
    std::size_t n = 0, d = 0;
    std::vector<double> x;
    std::vector<std::uint8_t> y;

    const double* row(std::size_t i) const { return x.data() + i * d; }
};

Table build_table(const Dataset& ds, const std::vector<int>& idx) {
    Table t;
    t.n = ds.samples.size();
    t.d = idx.size();
    t.x.reserve(t.n * t.d);
    t.y.reserve(t.n);
    for (const LabeledSample& s : ds.samples) {
        for (int j : idx) t.x.push_back(s.features[j]);
        t.y.push_back(s.ok ? 1 : 0);
    }
    return t;
}

double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

// ---------------------------------------------------------------- trees ----

struct TreeParams {
    int max_depth = 20;
    int min_leaf = 1;
    int mtry = 0; // per-split feature subsample; 0 means all candidates
};

/// Weighted CART with Gini impurity. Operates on an instance list (index +
/// weight pairs), so bootstrap replicas and boosting weights share one code
/// path. Split thresholds sit midway between adjacent distinct values;
/// candidate features are scanned in ascending order and the first best
/// split wins, which makes ties deterministic.
class TreeBuilder {
  public:
    TreeBuilder(const Table& data, const std::vector<int>& pool, const TreeParams& params,
                RandomStream* rng)
        : data_(data), pool_(pool), params_(params), rng_(rng) {}

    Tree build(std::vector<std::uint32_t> instances, std::vector<double> weights) {
        tree_.nodes.clear();
        tree_.importance.assign(data_.d, 0.0);
        inst_ = std::move(instances);
        w_ = std::move(weights);
        root_weight_ = std::accumulate(w_.begin(), w_.end(), 0.0);
        scratch_.resize(inst_.size());
        grow(0, inst_.size(), 0);
        return std::move(tree_);
    }

  private:
    struct Best {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    static double gini_term(double w_ok, double w_nok) {
        const double w = w_ok + w_nok;
        if (w <= 0.0) return 0.0;
        return w * (1.0 - (w_ok / w) * (w_ok / w) - (w_nok / w) * (w_nok / w));
    }

    std::int32_t grow(std::size_t lo, std::size_t hi, int depth) {
        double w_ok = 0.0, w_nok = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            (data_.y[inst_[i]] ? w_ok : w_nok) += w_[i];

        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[id].label = w_ok >= w_nok ? 1 : 0;

        const std::size_t m = hi - lo;
        const bool pure = w_ok == 0.0 || w_nok == 0.0;
        if (depth >= params_.max_depth || pure ||
            m < 2 * static_cast<std::size_t>(params_.min_leaf)) {
            return id;
        }

        const Best best = find_split(lo, hi, w_ok, w_nok);
        if (best.feature < 0) return id;

        tree_.importance[best.feature] += best.gain / root_weight_;

        // Partition instances; weights travel with their instance.
        std::size_t mid = lo;
        for (std::size_t i = lo; i < hi; ++i) {
            if (data_.row(inst_[i])[best.feature] <= best.threshold) {
                std::swap(inst_[i], inst_[mid]);
                std::swap(w_[i], w_[mid]);
                ++mid;
            }
        }

        tree_.nodes[id].feature = best.feature;
        tree_.nodes[id].threshold = best.threshold;
        const std::int32_t left = grow(lo, mid, depth + 1);
        const std::int32_t right = grow(mid, hi, depth + 1);
        tree_.nodes[id].left = left;
        tree_.nodes[id].right = right;
        return id;
    }

    Best find_split(std::size_t lo, std::size_t hi, double w_ok, double w_nok) {
        const std::size_t m = hi - lo;
        const double parent = gini_term(w_ok, w_nok);

        const std::vector<int>* candidates = &pool_;
        std::vector<int> sampled;
        if (params_.mtry > 0 && static_cast<std::size_t>(params_.mtry) < pool_.size()) {
            sampled = pool_;
            for (int t = 0; t < params_.mtry; ++t) {
                const auto pick = t + static_cast<std::size_t>(rng_->below(sampled.size() - t));
                std::swap(sampled[t], sampled[pick]);
            }
            sampled.resize(params_.mtry);
            std::sort(sampled.begin(), sampled.end());
            candidates = &sampled;
        }

        Best best;
        auto& order = scratch_;
        for (int f : *candidates) {
            for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<std::uint32_t>(lo + i);
            std::sort(order.begin(), order.begin() + m, [&](std::uint32_t a, std::uint32_t b) {
                return data_.row(inst_[a])[f] < data_.row(inst_[b])[f];
            });

            double left_ok = 0.0, left_nok = 0.0;
            for (std::size_t i = 1; i < m; ++i) {
                const std::uint32_t prev = order[i - 1];
                (data_.y[inst_[prev]] ? left_ok : left_nok) += w_[prev];
                const double v_prev = data_.row(inst_[prev])[f];
                const double v_here = data_.row(inst_[order[i]])[f];
                if (v_here <= v_prev) continue; // split only between distinct values
                if (i < static_cast<std::size_t>(params_.min_leaf) ||
                    m - i < static_cast<std::size_t>(params_.min_leaf))
                    continue;
                const double gain =
                    parent - gini_term(left_ok, left_nok) - gini_term(w_ok - left_ok, w_nok - left_nok);
                if (gain > best.gain + 1e-15) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (v_prev + v_here);
                }
            }
        }
        if (best.gain <= 1e-12) best.feature = -1;
        return best;
    }

    const Table& data_;
    const std::vector<int>& pool_;
    TreeParams params_;
    RandomStream* rng_;
    Tree tree_;
    std::vector<std::uint32_t> inst_;
    std::vector<double> w_;
    std::vector<std::uint32_t> scratch_;
    double root_weight_ = 1.0;
};

std::vector<std::uint32_t> iota_instances(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return v;
}

std::vector<int> iota_features(std::size_t d) {
    std::vector<int> v(d);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// ------------------------------------------------------------- GNB / LDA ----

void fit_gaussians(const Table& t, ClassifierModel& model) {
    const std::size_t d = t.d;
    std::size_t count[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        model.class_mean[c].assign(d, 0.0);
        model.class_var[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < t.n; ++i) {
        const int c = t.y[i];
        ++count[c];
        for (std::size_t j = 0; j < d; ++j) model.class_mean[c][j] += t.row(i)[j];
    }
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < d; ++j) model.class_mean[c][j] /= static_cast<double>(count[c]);
    for (std::size_t i = 0; i < t.n; ++i) {
        const int c = t.y[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = t.row(i)[j] - model.class_mean[c][j];
            model.class_var[c][j] += diff * diff;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < d; ++j)
            model.class_var[c][j] =
                std::max(model.class_var[c][j] / static_cast<double>(count[c]), 1e-9);
        model.log_prior[c] =
            std::log(static_cast<double>(count[c]) / static_cast<double>(t.n));
    }
}

/// In-place Cholesky; returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[i * d + i] = std::sqrt(s);
            } else {
                a[i * d + j] = s / a[j * d + j];
            }
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t d, std::vector<double>& b) {
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * b[k];
        b[i] = s / l[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * b[k];
        b[i] = s / l[i * d + i];
    }
}

void fit_lda(const Table& t, ClassifierModel& model) {
    const std::size_t d = t.d;
    fit_gaussians(t, model); // reuses the class means; variances unused here

    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < t.n; ++i) {
        const int c = t.y[i];
        const double* row = t.row(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double da = row[a] - model.class_mean[c][a];
            for (std::size_t b = 0; b <= a; ++b)
                cov[a * d + b] += da * (row[b] - model.class_mean[c][b]);
        }
    }
    const double denom = static_cast<double>(t.n) - 2.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            cov[a * d + b] /= denom;
            cov[b * d + a] = cov[a * d + b];
        }
        cov[a * d + a] += 1e-6; // ridge
    }

    std::vector<double> diff(d);
    for (std::size_t j = 0; j < d; ++j) diff[j] = model.class_mean[1][j] - model.class_mean[0][j];

    std::vector<double> chol = cov;
    if (cholesky(chol, d)) {
        model.lin_w = diff;
        cholesky_solve(chol, d, model.lin_w);
    } else {
        // Singular pooled covariance: keep only the diagonal.
        model.notes.push_back("lda: covariance not positive definite; diagonal fallback used");
        model.lin_w.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) model.lin_w[j] = diff[j] / cov[j * d + j];
    }

    double mid = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        mid += model.lin_w[j] * 0.5 * (model.class_mean[1][j] + model.class_mean[0][j]);
    model.lin_b = -mid + (model.log_prior[1] - model.log_prior[0]);
}

// ------------------------------------------------------------------ SVM ----

struct SmoResult {
    std::vector<double> alpha;
    double b = 0.0;
    int iterations = 0;
    bool converged = false;
};

SmoResult smo_train(const Table& t, const std::vector<double>& ypm, double C, double gamma,
                    double tol, int max_iter) {
    const std::size_t n = t.n;
    SmoResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> g(n, -1.0); // dual gradient

    // Clipped updates can leave a multiplier within rounding error of a box
    // bound; treating it as interior would stall the pair selection, so bound
    // membership carries a small tolerance.
    const double snap = 1e-10 * C;
    auto at_lower = [&](double a) { return a <= snap; };
    auto at_upper = [&](double a) { return a >= C - snap; };

    // Round-robin row cache: the working set SMO revisits is a small, stable
    // subset, so a modest slab absorbs nearly every kernel-row request.
    const std::size_t cache_rows =
        std::min(n, std::max<std::size_t>(256, (96ull << 20) / (8 * n)));
    std::vector<double> cache(cache_rows * n);
    std::vector<std::int32_t> slot_of(n, -1);
    std::vector<std::int32_t> row_of(cache_rows, -1);
    std::size_t clock_hand = 0;
    auto kernel_row = [&](std::size_t s) -> const double* {
        if (slot_of[s] >= 0) return cache.data() + static_cast<std::size_t>(slot_of[s]) * n;
        const std::size_t slot = clock_hand++ % cache_rows;
        if (row_of[slot] >= 0) slot_of[static_cast<std::size_t>(row_of[slot])] = -1;
        row_of[slot] = static_cast<std::int32_t>(s);
        slot_of[s] = static_cast<std::int32_t>(slot);
        double* out = cache.data() + slot * n;
        const double* xs = t.row(s);
        for (std::size_t a = 0; a < n; ++a)
            out[a] = std::exp(-gamma * sq_dist(xs, t.row(a), t.d));
        return out;
    };

    double m_up = 0.0, m_low = 0.0;
    for (; res.iterations < max_iter; ++res.iterations) {
        std::ptrdiff_t i = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a) {
            const double v = -ypm[a] * g[a];
            const bool up =
                (ypm[a] > 0.0 && !at_upper(res.alpha[a])) || (ypm[a] < 0.0 && !at_lower(res.alpha[a]));
            const bool low =
                (ypm[a] > 0.0 && !at_lower(res.alpha[a])) || (ypm[a] < 0.0 && !at_upper(res.alpha[a]));
            if (up && v > m_up) {
                m_up = v;
                i = static_cast<std::ptrdiff_t>(a);
            }
            if (low && v < m_low) m_low = v;
        }
        if (i < 0 || m_up - m_low <= tol) {
            res.converged = true;
            break;
        }

        // Second-order partner choice: maximize the guaranteed objective
        // decrease against the fixed i. The RBF diagonal is 1, so the pair
        // curvature is eta = 2 (1 - K_ij).
        const double* ki = kernel_row(static_cast<std::size_t>(i));
        std::ptrdiff_t j = -1;
        double best_gain = 0.0, eta_j = 1.0;
        for (std::size_t a = 0; a < n; ++a) {
            const bool low =
                (ypm[a] > 0.0 && !at_lower(res.alpha[a])) || (ypm[a] < 0.0 && !at_upper(res.alpha[a]));
            if (!low) continue;
            const double v = -ypm[a] * g[a];
            if (v >= m_up) continue;
            const double gap = m_up - v;
            const double eta = std::max(2.0 * (1.0 - ki[a]), 1e-12);
            const double gain = gap * gap / eta;
            if (gain > best_gain) {
                best_gain = gain;
                j = static_cast<std::ptrdiff_t>(a);
                eta_j = eta;
            }
        }
        if (j < 0) break; // converged stays false: violating pair with no usable partner

        const double yi = ypm[static_cast<std::size_t>(i)], yj = ypm[static_cast<std::size_t>(j)];
        const double ei = yi * g[static_cast<std::size_t>(i)];
        const double ej = yj * g[static_cast<std::size_t>(j)];

        const double ai_old = res.alpha[static_cast<std::size_t>(i)];
        const double aj_old = res.alpha[static_cast<std::size_t>(j)];
        double aj = aj_old + yj * (ei - ej) / eta_j;
        double lo_clip, hi_clip;
        if (yi != yj) {
            lo_clip = std::max(0.0, aj_old - ai_old);
            hi_clip = std::min(C, C + aj_old - ai_old);
        } else {
            lo_clip = std::max(0.0, ai_old + aj_old - C);
            hi_clip = std::min(C, ai_old + aj_old);
        }
        aj = std::clamp(aj, lo_clip, hi_clip);
        double ai = ai_old + yi * yj * (aj_old - aj);
        if (at_lower(aj)) aj = 0.0;
        else if (at_upper(aj)) aj = C;
        if (at_lower(ai)) ai = 0.0;
        else if (at_upper(ai)) ai = C;
        if (std::abs(aj - aj_old) < 1e-14 && std::abs(ai - ai_old) < 1e-14)
            break; // converged stays false: numerically stalled
        res.alpha[static_cast<std::size_t>(i)] = ai;
        res.alpha[static_cast<std::size_t>(j)] = aj;

        const double* kj = kernel_row(static_cast<std::size_t>(j));
        const double di = ai - ai_old, dj = aj - aj_old;
        for (std::size_t a = 0; a < n; ++a)
            g[a] += ypm[a] * (yi * di * ki[a] + yj * dj * kj[a]);
    }

    double b_sum = 0.0;
    std::size_t b_count = 0;
    for (std::size_t a = 0; a < n; ++a) {
        if (res.alpha[a] > 1e-8 && res.alpha[a] < C - 1e-8) {
            b_sum += -ypm[a] * g[a];
            ++b_count;
        }
    }
    res.b = b_count > 0 ? b_sum / static_cast<double>(b_count) : 0.5 * (m_up + m_low);
    return res;
}

// -------------------------------------------------------------- boosting ----

std::vector<std::uint32_t> weighted_resample(const std::vector<double>& weights, std::size_t count,
                                             RandomStream& rng) {
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.back();
    std::vector<std::uint32_t> picks(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform() * total;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        picks[i] = static_cast<std::uint32_t>(it - cumulative.begin());
    }
    return picks;
}

} // namespace

// ------------------------------------------------------------- public API ----

const std::array<ClassifierKind, 7>& all_classifier_kinds() {
    static const std::array<ClassifierKind, 7> kinds = {
        ClassifierKind::GNB,          ClassifierKind::LDA,      ClassifierKind::KNN,
        ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
        ClassifierKind::AdaBoost,     ClassifierKind::SvmRbf};
    return kinds;
}

std::string kind_name(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::GNB: return "gnb";
    case ClassifierKind::LDA: return "lda";
    case ClassifierKind::KNN: return "knn";
    case ClassifierKind::DecisionTree: return "cart";
    case ClassifierKind::RandomForest: return "rf";
    case ClassifierKind::AdaBoost: return "ada";
    case ClassifierKind::SvmRbf: return "svm";
    }
    throw std::invalid_argument("kind_name: unknown kind");
}

ClassifierKind kind_from_name(const std::string& name) {
    for (ClassifierKind k : all_classifier_kinds())
        if (kind_name(k) == name) return k;
    throw std::invalid_argument("unknown classifier kind '" + name + "'");
}

Hyperparams default_hyperparams(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::GNB:
    case ClassifierKind::LDA: return {};
    case ClassifierKind::KNN: return {{"k", 5}};
    case ClassifierKind::DecisionTree: return {{"max_depth", 19}, {"min_leaf", 4}};
    case ClassifierKind::RandomForest:
        return {{"n_estimators", 50}, {"sample_rate", 0.7}, {"max_depth", 20}, {"min_leaf", 6}};
    case ClassifierKind::AdaBoost:
        return {{"n_estimators", 50},   {"sample_rate", 0.7}, {"feature_fraction", 0.4},
                {"learning_rate", 0.1}, {"max_depth", 3},     {"min_leaf", 4}};
    case ClassifierKind::SvmRbf: return {{"C", 2048.0}, {"gamma", 0.03125}};
    }
    throw std::invalid_argument("default_hyperparams: unknown kind");
}

void Scaler::fit(const std::vector<double>& x, std::size_t n, std::size_t d,
                 std::vector<int>* degenerate) {
    mean.assign(d, 0.0);
    sdev.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[i * d + j] - mean[j];
            sdev[j] += diff * diff;
        }
    for (std::size_t j = 0; j < d; ++j) {
        sdev[j] = std::sqrt(sdev[j] / static_cast<double>(n));
        if (sdev[j] < 1e-12) {
            sdev[j] = 1.0;
            if (degenerate) degenerate->push_back(static_cast<int>(j));
        }
    }
}

void Scaler::apply(double* z, std::size_t d) const {
    for (std::size_t j = 0; j < d; ++j) z[j] = (z[j] - mean[j]) / sdev[j];
}

std::uint8_t Tree::predict(const double* z) const {
    std::int32_t at = 0;
    while (nodes[at].feature >= 0)
        at = z[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].label;
}

ClassifierModel train(ClassifierKind kind, const Hyperparams& hp, const Dataset& dataset,
                      std::uint64_t seed, std::vector<int> feature_indices) {
    if (dataset.samples.empty()) throw std::domain_error("train: empty dataset");
    if (feature_indices.empty()) feature_indices = iota_features(kFeatureCount);
    std::sort(feature_indices.begin(), feature_indices.end());
    for (int idx : feature_indices)
        if (idx < 0 || idx >= kFeatureCount) throw std::domain_error("train: bad feature index");

    ClassifierModel model;
    model.kind = kind;
    model.hp = hp;
    model.feature_indices = feature_indices;
    model.seed = seed;

    Table t = build_table(dataset, feature_indices);
    const std::size_t ok_total = dataset.ok_count();
    if (ok_total == 0 || ok_total == t.n) {
        model.constant = true;
        model.constant_label = ok_total ? 1 : 0;
        model.notes.push_back("training data is single-class; constant predictor");
        return model;
    }

    const bool tree_kind = kind == ClassifierKind::DecisionTree ||
                           kind == ClassifierKind::RandomForest || kind == ClassifierKind::AdaBoost;
    if (!tree_kind) {
        std::vector<int> degenerate;
        model.scaler.fit(t.x, t.n, t.d, &degenerate);
        for (int j : degenerate)
            model.notes.push_back(std::string("zero-variance feature ") +
                                  kFeatureNames[feature_indices[j]] + " excluded from scaling");
        for (std::size_t i = 0; i < t.n; ++i) model.scaler.apply(t.x.data() + i * t.d, t.d);
    }

    switch (kind) {
    case ClassifierKind::GNB: {
        fit_gaussians(t, model);
        break;
    }
    case ClassifierKind::LDA: {
        fit_lda(t, model);
        break;
    }
    case ClassifierKind::KNN: {
        model.knn_k = std::max(1, hp_int(hp, "k", 5));
        model.knn_x = t.x;
        model.knn_y = t.y;
        break;
    }
    case ClassifierKind::DecisionTree: {
        TreeParams params{hp_int(hp, "max_depth", 19), hp_int(hp, "min_leaf", 4), 0};
        const std::vector<int> pool = iota_features(t.d);
        TreeBuilder builder(t, pool, params, nullptr);
        model.trees.push_back(
            builder.build(iota_instances(t.n), std::vector<double>(t.n, 1.0)));
        break;
    }
    case ClassifierKind::RandomForest: {
        const int estimators = std::max(1, hp_int(hp, "n_estimators", 50));
        const double rate = hp_get(hp, "sample_rate", 0.7);
        TreeParams params{hp_int(hp, "max_depth", 20), hp_int(hp, "min_leaf", 6),
                          hp_int(hp, "mtry", static_cast<int>(std::lround(std::sqrt(
                                                 static_cast<double>(t.d)))))};
        const std::vector<int> pool = iota_features(t.d);
        const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::lround(rate * static_cast<double>(t.n))));
        model.trees.resize(estimators);
        parallel_for(static_cast<std::size_t>(estimators), [&](std::size_t e) {
            RandomStream rng(mix_seed(seed, 0xf0e5), e);
            std::vector<std::uint32_t> boot(m);
            for (std::uint32_t& b : boot) b = static_cast<std::uint32_t>(rng.below(t.n));
            TreeBuilder builder(t, pool, params, &rng);
            model.trees[e] = builder.build(std::move(boot), std::vector<double>(m, 1.0));
        });
        break;
    }
    case ClassifierKind::AdaBoost: {
        const int estimators = std::max(1, hp_int(hp, "n_estimators", 50));
        const double rate = hp_get(hp, "sample_rate", 0.7);
        const double frac = hp_get(hp, "feature_fraction", 0.4);
        const double lr = hp_get(hp, "learning_rate", 0.1);
        TreeParams params{hp_int(hp, "max_depth", 3), hp_int(hp, "min_leaf", 4), 0};
        const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::lround(rate * static_cast<double>(t.n))));
        const auto n_feat = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(frac * static_cast<double>(t.d))));

        std::vector<double> w(t.n, 1.0 / static_cast<double>(t.n));
        std::vector<std::uint8_t> votes(t.n);
        for (int e = 0; e < estimators; ++e) {
            RandomStream rng(mix_seed(seed, 0xb005), static_cast<std::uint64_t>(e));

            // A resampled stump can come out no better than chance; redraw a
            // few times before giving up on the whole ensemble.
            Tree tree;
            double err = 1.0;
            for (int attempt = 0; attempt < 3 && err >= 0.5; ++attempt) {
                std::vector<int> pool = iota_features(t.d);
                for (std::size_t f = 0; f < n_feat; ++f) {
                    const auto pick = f + static_cast<std::size_t>(rng.below(pool.size() - f));
                    std::swap(pool[f], pool[pick]);
                }
                pool.resize(n_feat);
                std::sort(pool.begin(), pool.end());

                TreeBuilder builder(t, pool, params, &rng);
                tree = builder.build(weighted_resample(w, m, rng), std::vector<double>(m, 1.0));

                err = 0.0;
                for (std::size_t a = 0; a < t.n; ++a) {
                    votes[a] = tree.predict(t.row(a));
                    if (votes[a] != t.y[a]) err += w[a];
                }
            }
            if (err >= 0.5) break; // no usable weak learner on this weighting
            err = std::max(err, 1e-12);
            const double alpha = lr * std::log((1.0 - err) / err);

            double total = 0.0;
            for (std::size_t a = 0; a < t.n; ++a) {
                if (votes[a] != t.y[a]) w[a] *= std::exp(alpha);
                total += w[a];
            }
            for (double& wa : w) wa /= total;

            model.trees.push_back(std::move(tree));
            model.alphas.push_back(alpha);
        }
        if (model.trees.empty())
            throw std::runtime_error("adaboost: no usable weak learner on this data");
        break;
    }
    case ClassifierKind::SvmRbf: {
        const double C = hp_get(hp, "C", 2048.0);
        const double gamma = hp_get(hp, "gamma", 0.03125);
        std::vector<double> ypm(t.n);
        for (std::size_t i = 0; i < t.n; ++i) ypm[i] = t.y[i] ? 1.0 : -1.0;
        const int cap = std::max(100000, static_cast<int>(20 * t.n));
        const SmoResult res = smo_train(t, ypm, C, gamma, 1e-3, cap);
        if (!res.converged)
            model.notes.push_back("svm: optimizer stopped before the KKT gap closed");
        model.svm_gamma = gamma;
        model.svm_b = res.b;
        for (std::size_t i = 0; i < t.n; ++i) {
            if (res.alpha[i] > 1e-12) {
                model.sv_coef.push_back(res.alpha[i] * ypm[i]);
                model.sv.insert(model.sv.end(), t.row(i), t.row(i) + t.d);
            }
        }
        break;
    }
    default: throw std::invalid_argument("train: unknown kind");
    }
    return model;
}

double predict_score(const ClassifierModel& model, const FeatureVector& fv) {
    if (model.constant) return model.constant_label ? 1.0 : -1.0;
    const std::size_t d = model.dim();
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = fv[model.feature_indices[j]];
    if (!model.scaler.empty()) model.scaler.apply(z.data(), d);

    switch (model.kind) {
    case ClassifierKind::GNB: {
        double lp[2];
        for (int c = 0; c < 2; ++c) {
            lp[c] = model.log_prior[c];
            for (std::size_t j = 0; j < d; ++j) {
                const double var = model.class_var[c][j];
                const double diff = z[j] - model.class_mean[c][j];
                lp[c] += -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
            }
        }
        return lp[1] - lp[0];
    }
    case ClassifierKind::LDA: {
        double s = model.lin_b;
        for (std::size_t j = 0; j < d; ++j) s += model.lin_w[j] * z[j];
        return s;
    }
    case ClassifierKind::KNN: {
        const std::size_t n = model.knn_y.size();
        const auto k = static_cast<std::size_t>(std::min<std::size_t>(model.knn_k, n));
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i)
            dist[i] = {sq_dist(z.data(), model.knn_x.data() + i * d, d), i};
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        double vote = 0.0;
        for (std::size_t i = 0; i < k; ++i) vote += model.knn_y[dist[i].second] ? 1.0 : -1.0;
        return vote / static_cast<double>(k);
    }
    case ClassifierKind::DecisionTree: {
        return model.trees[0].predict(z.data()) ? 1.0 : -1.0;
    }
    case ClassifierKind::RandomForest: {
        double vote = 0.0;
        for (const Tree& tree : model.trees) vote += tree.predict(z.data()) ? 1.0 : -1.0;
        return vote / static_cast<double>(model.trees.size());
    }
    case ClassifierKind::AdaBoost: {
        double score = 0.0, total = 0.0;
        for (std::size_t e = 0; e < model.trees.size(); ++e) {
            score += model.alphas[e] * (model.trees[e].predict(z.data()) ? 1.0 : -1.0);
            total += std::abs(model.alphas[e]);
        }
        return total > 0.0 ? score / total : 0.0;
    }
    case ClassifierKind::SvmRbf: {
        const std::size_t m = model.sv_coef.size();
        double f = model.svm_b;
        for (std::size_t i = 0; i < m; ++i)
            f += model.sv_coef[i] * std::exp(-model.svm_gamma *
                                             sq_dist(z.data(), model.sv.data() + i * d, d));
        return f;
    }
    }
    throw std::invalid_argument("predict_score: unknown kind");
}

bool predict(const ClassifierModel& model, const FeatureVector& fv) {
    return predict_score(model, fv) >= 0.0;
}

EvalReport evaluate(const ClassifierModel& model, const Dataset& dataset) {
    EvalReport rep;
    for (const LabeledSample& s : dataset.samples) {
        const bool hat = predict(model, s.features);
        const int row = s.ok ? 0 : 1;
        const int col = hat ? 0 : 1;
        ++rep.confusion[row][col];
    }
    const std::size_t n = dataset.samples.size();
    const std::size_t correct = rep.confusion[0][0] + rep.confusion[1][1];
    rep.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    const auto ratio = [](std::size_t a, std::size_t b) {
        return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
    };
    rep.precision_ok = ratio(rep.confusion[0][0], rep.confusion[0][0] + rep.confusion[1][0]);
    rep.recall_ok = ratio(rep.confusion[0][0], rep.confusion[0][0] + rep.confusion[0][1]);
    rep.precision_nok = ratio(rep.confusion[1][1], rep.confusion[1][1] + rep.confusion[0][1]);
    rep.recall_nok = ratio(rep.confusion[1][1], rep.confusion[1][1] + rep.confusion[1][0]);
    return rep;
}

std::vector<int> cv_fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RandomStream rng(seed, 0xcf01d);
    for (std::size_t i = n; i-- > 1;)
        std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<int> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        fold[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold;
}

namespace {

Hyperparams sample_hyperparams(ClassifierKind kind, RandomStream& rng) {
    const auto pick = [&rng](std::initializer_list<double> values) {
        const double* data = values.begin();
        return data[rng.below(values.size())];
    };
    const auto pick_int = [&rng](int lo, int hi) {
        return static_cast<double>(lo) +
               static_cast<double>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    };
    switch (kind) {
    case ClassifierKind::GNB:
    case ClassifierKind::LDA: return {};
    case ClassifierKind::KNN: return {{"k", 1.0 + 2.0 * static_cast<double>(rng.below(15))}};
    case ClassifierKind::DecisionTree:
        return {{"max_depth", pick_int(4, 20)}, {"min_leaf", pick_int(4, 30)}};
    case ClassifierKind::RandomForest:
        return {{"sample_rate", pick({0.3, 0.4, 0.5, 0.6, 0.7})},
                {"n_estimators", pick({30, 50, 70, 100, 150, 200})},
                {"max_depth", pick_int(4, 20)},
                {"min_leaf", pick_int(4, 30)}};
    case ClassifierKind::AdaBoost:
        return {{"feature_fraction", pick({0.2, 0.3, 0.4, 0.5, 0.6, 0.7})},
                {"sample_rate", pick({0.3, 0.4, 0.5, 0.6, 0.7})},
                {"n_estimators", pick({30, 50, 70, 100, 150, 200})},
                {"learning_rate", pick({0.001, 0.01, 0.1, 0.2, 0.5, 1.0})},
                {"max_depth", 3},
                {"min_leaf", 4}};
    case ClassifierKind::SvmRbf: {
        const double ge = -15.0 + 2.0 * static_cast<double>(rng.below(10)); // -15..3
        const double ce = -5.0 + 2.0 * static_cast<double>(rng.below(11));  // -5..15
        return {{"gamma", std::exp2(ge)}, {"C", std::exp2(ce)}};
    }
    }
    throw std::invalid_argument("sample_hyperparams: unknown kind");
}

/// Lexicographic simplicity key: fewer estimators, then shallower trees,
/// then smaller k, then stronger regularization (smaller C, then gamma).
std::array<double, 5> complexity_key(const Hyperparams& hp) {
    return {hp_get(hp, "n_estimators", 0.0), hp_get(hp, "max_depth", 0.0),
            hp_get(hp, "k", 0.0), hp_get(hp, "C", 0.0), hp_get(hp, "gamma", 0.0)};
}

} // namespace

SearchResult random_search(ClassifierKind kind, const Dataset& dataset, int iterations, int folds,
                           std::uint64_t seed) {
    if (folds < 2) throw std::domain_error("random_search: needs at least 2 folds");
    const std::vector<int> fold = cv_fold_assignment(dataset.samples.size(), folds, seed);

    const auto cv_accuracy = [&](const Hyperparams& hp, std::uint64_t hp_salt) {
        double acc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            Dataset fit_part, val_part;
            for (std::size_t i = 0; i < dataset.samples.size(); ++i)
                (fold[i] == f ? val_part : fit_part).samples.push_back(dataset.samples[i]);
            const ClassifierModel m =
                train(kind, hp, fit_part, mix_seed(seed, hp_salt * 97 + static_cast<std::uint64_t>(f)));
            acc_sum += evaluate(m, val_part).accuracy;
        }
        return acc_sum / folds;
    };

    if (kind == ClassifierKind::GNB || kind == ClassifierKind::LDA) {
        SearchResult res{default_hyperparams(kind), 0.0};
        res.cv_accuracy = cv_accuracy(res.hp, 0);
        return res;
    }

    RandomStream rng(seed, 0x5ea6c4);
    SearchResult best;
    bool have_best = false;
    for (int it = 0; it < iterations; ++it) {
        const Hyperparams hp = sample_hyperparams(kind, rng);
        const double acc = cv_accuracy(hp, static_cast<std::uint64_t>(it) + 1);
        const bool better =
            !have_best || acc > best.cv_accuracy ||
            (acc == best.cv_accuracy && complexity_key(hp) < complexity_key(best.hp));
        if (better) {
            best = {hp, acc};
            have_best = true;
        }
    }
    return best;
}

std::vector<std::pair<int, double>> feature_importance(const ClassifierModel& model) {
    if (model.trees.empty())
        throw std::invalid_argument("feature_importance: model has no trees");

    std::vector<double> raw(kFeatureCount, 0.0);
    for (std::size_t e = 0; e < model.trees.size(); ++e) {
        const double stage = model.kind == ClassifierKind::AdaBoost ? model.alphas[e] : 1.0;
        const Tree& tree = model.trees[e];
        for (std::size_t j = 0; j < tree.importance.size(); ++j)
            raw[model.feature_indices[j]] += stage * tree.importance[j];
    }
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (total > 0.0)
        for (double& v : raw) v /= total;

    std::vector<std::pair<int, double>> ranked;
    ranked.reserve(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) ranked.emplace_back(i, raw[i]);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

std::vector<std::pair<int, double>> topk_study(ClassifierKind kind, const Hyperparams& hp,
                                               const Dataset& train_set, const Dataset& val_set,
                                               const std::vector<int>& k_list,
                                               std::uint64_t seed) {
    const ClassifierModel full = train(kind, hp, train_set, seed);
    const auto ranked = feature_importance(full);

    std::vector<std::pair<int, double>> curve;
    for (int k : k_list) {
        if (k < 1 || k > kFeatureCount) throw std::domain_error("topk_study: k out of range");
        std::vector<int> subset;
        subset.reserve(k);
        for (int i = 0; i < k; ++i) subset.push_back(ranked[i].first);
        std::sort(subset.begin(), subset.end());
        const ClassifierModel m = train(kind, hp, train_set, seed, subset);
        curve.emplace_back(k, evaluate(m, val_set).accuracy);
    }
    return curve;
}

// ---------------------------------------------------------- persistence ----

namespace {

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    return {{"nodes", nodes}, {"importance", tree.importance}};
}

Tree tree_from_json(const json& j) {
    Tree tree;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<std::int32_t>();
        node.right = n.at(3).get<std::int32_t>();
        node.label = n.at(4).get<std::uint8_t>();
        tree.nodes.push_back(node);
    }
    tree.importance = j.at("importance").get<std::vector<double>>();
    return tree;
}

} // namespace

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    json root;
    root["format"] = kModelFormat;
    root["kind"] = kind_name(model.kind);
    root["hyperparams"] = model.hp;
    root["feature_indices"] = model.feature_indices;
    root["seed"] = model.seed;
    root["notes"] = model.notes;
    root["constant"] = model.constant;
    root["constant_label"] = model.constant_label;
    if (!model.scaler.empty()) {
        root["scaler"] = {{"mean", model.scaler.mean}, {"sdev", model.scaler.sdev}};
    }
    switch (model.kind) {
    case ClassifierKind::GNB:
        root["state"] = {{"mean_nok", model.class_mean[0]}, {"mean_ok", model.class_mean[1]},
                         {"var_nok", model.class_var[0]},   {"var_ok", model.class_var[1]},
                         {"log_prior", {model.log_prior[0], model.log_prior[1]}}};
        break;
    case ClassifierKind::LDA:
        root["state"] = {{"w", model.lin_w}, {"b", model.lin_b}};
        break;
    case ClassifierKind::KNN:
        root["state"] = {{"k", model.knn_k}, {"x", model.knn_x}, {"y", model.knn_y}};
        break;
    case ClassifierKind::DecisionTree:
    case ClassifierKind::RandomForest:
    case ClassifierKind::AdaBoost: {
        json trees = json::array();
        for (const Tree& t : model.trees) trees.push_back(tree_to_json(t));
        root["state"] = {{"trees", trees}, {"alphas", model.alphas}};
        break;
    }
    case ClassifierKind::SvmRbf:
        root["state"] = {{"gamma", model.svm_gamma},
                         {"b", model.svm_b},
                         {"sv", model.sv},
                         {"coef", model.sv_coef}};
        break;
    }
    write_file(path, root.dump(2) + "\n");
}

ClassifierModel load_model(const std::filesystem::path& path) {
    const json root = json::parse(read_file(path));
    if (root.at("format").get<std::string>() != kModelFormat)
        throw std::runtime_error("load_model: unknown format tag");

    ClassifierModel model;
    model.kind = kind_from_name(root.at("kind").get<std::string>());
    model.hp = root.at("hyperparams").get<Hyperparams>();
    model.feature_indices = root.at("feature_indices").get<std::vector<int>>();
    model.seed = root.at("seed").get<std::uint64_t>();
    model.notes = root.at("notes").get<std::vector<std::string>>();
    model.constant = root.at("constant").get<bool>();
    model.constant_label = root.at("constant_label").get<std::uint8_t>();
    if (root.contains("scaler")) {
        model.scaler.mean = root["scaler"].at("mean").get<std::vector<double>>();
        model.scaler.sdev = root["scaler"].at("sdev").get<std::vector<double>>();
    }
    if (model.constant) return model;

    const json& st = root.at("state");
    switch (model.kind) {
    case ClassifierKind::GNB:
        model.class_mean[0] = st.at("mean_nok").get<std::vector<double>>();
        model.class_mean[1] = st.at("mean_ok").get<std::vector<double>>();
        model.class_var[0] = st.at("var_nok").get<std::vector<double>>();
        model.class_var[1] = st.at("var_ok").get<std::vector<double>>();
        model.log_prior[0] = st.at("log_prior").at(0).get<double>();
        model.log_prior[1] = st.at("log_prior").at(1).get<double>();
        break;
    case ClassifierKind::LDA:
        model.lin_w = st.at("w").get<std::vector<double>>();
        model.lin_b = st.at("b").get<double>();
        break;
    case ClassifierKind::KNN:
        model.knn_k = st.at("k").get<int>();
        model.knn_x = st.at("x").get<std::vector<double>>();
        model.knn_y = st.at("y").get<std::vector<std::uint8_t>>();
        break;
    case ClassifierKind::DecisionTree:
    case ClassifierKind::RandomForest:
    case ClassifierKind::AdaBoost:
        for (const auto& tj : st.at("trees")) model.trees.push_back(tree_from_json(tj));
        model.alphas = st.at("alphas").get<std::vector<double>>();
        break;
    case ClassifierKind::SvmRbf:
        model.svm_gamma = st.at("gamma").get<double>();
        model.svm_b = st.at("b").get<double>();
        model.sv = st.at("sv").get<std::vector<double>>();
        model.sv_coef = st.at("coef").get<std::vector<double>>();
        break;
    }
    return model;
}

} // namespace loopgrade
