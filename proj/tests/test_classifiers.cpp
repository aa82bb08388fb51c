#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopgrade/classifiers.hpp"
#include "loopgrade/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace fs = std::filesystem;
using namespace loopgrade;

namespace {

// Two well-separated gaussian blobs: dims 0..9 carry the class at +/-1.5,
// dims 10..29 are pure noise. Every kind should exceed 90% here.
Dataset blobs(std::size_t per_class, std::uint64_t seed) {
    Dataset d;
    d.seed = seed;
    RandomStream rng(seed);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        LabeledSample s;
        s.ok = i >= per_class;
        const double center = s.ok ? 1.5 : -1.5;
        for (int j = 0; j < kFeatureCount; ++j)
            s.features[static_cast<std::size_t>(j)] =
                j < 10 ? rng.normal(center, 1.0) : rng.normal(0.0, 0.3);
        d.samples.push_back(s);
    }
    return d;
}

// Single informative coordinate for the tree tests: dim 3 separates the
// classes completely, everything else is noise.
Dataset one_split(std::size_t per_class, std::uint64_t seed) {
    Dataset d;
    d.seed = seed;
    RandomStream rng(seed);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        LabeledSample s;
        s.ok = i >= per_class;
        for (int j = 0; j < kFeatureCount; ++j)
            s.features[static_cast<std::size_t>(j)] = rng.normal(0.0, 1.0);
        s.features[3] = (s.ok ? 5.0 : 1.0) + rng.uniform(-0.5, 0.5);
        d.samples.push_back(s);
    }
    return d;
}

} // namespace

TEST_CASE("every kind separates gaussian blobs") {
    const Dataset train_set = blobs(200, 101);
    const Dataset val_set = blobs(100, 202);
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(kind_name(kind));
        const ClassifierModel m = train(kind, default_hyperparams(kind), train_set, 7);
        const EvalReport rep = evaluate(m, val_set);
        CHECK(rep.accuracy >= 0.9);
        // The verdict and the signed score must agree.
        for (std::size_t i = 0; i < 20; ++i) {
            const FeatureVector& fv = val_set.samples[i].features;
            const double score = predict_score(m, fv);
            if (std::abs(score) > 1e-12) CHECK(predict(m, fv) == (score > 0.0));
        }
    }
}

TEST_CASE("a single-class training set yields an explicit constant model") {
    Dataset d = blobs(10, 5);
    for (LabeledSample& s : d.samples) s.ok = false;
    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(kind_name(kind));
        const ClassifierModel m = train(kind, default_hyperparams(kind), d, 7);
        CHECK(m.constant);
        CHECK(m.constant_label == 0);
        CHECK_FALSE(predict(m, d.samples[0].features));
        CHECK(evaluate(m, d).accuracy == 1.0);
    }
}

TEST_CASE("two-point SVM reproduces the closed-form dual solution") {
    // Two samples at scaled coordinates -1 and +1 in the only varying
    // dimension. With gamma = 0.5, K12 = exp(-2); the unconstrained pair
    // solution alpha = 1/(1 - K12) puts both margins exactly at +/-1 and the
    // symmetric bias at zero.
    Dataset d;
    for (int i = 0; i < 2; ++i) {
        LabeledSample s;
        s.ok = i == 1;
        s.features.fill(7.0); // constant dims are degenerate and drop out
        s.features[0] = i == 0 ? 0.0 : 2.0;
        d.samples.push_back(s);
    }
    const Hyperparams hp{{"C", 10.0}, {"gamma", 0.5}};
    const ClassifierModel m = train(ClassifierKind::SvmRbf, hp, d, 1);

    CHECK(m.sv.size() == 2 * m.dim());
    CHECK(std::abs(m.svm_b) < 1e-9);
    CHECK(std::abs(predict_score(m, d.samples[0].features) + 1.0) < 1e-9);
    CHECK(std::abs(predict_score(m, d.samples[1].features) - 1.0) < 1e-9);
    CHECK_FALSE(predict(m, d.samples[0].features));
    CHECK(predict(m, d.samples[1].features));

    const double alpha = 1.0 / (1.0 - std::exp(-2.0));
    REQUIRE(m.sv_coef.size() == 2);
    CHECK(std::abs(std::abs(m.sv_coef[0]) - alpha) < 1e-9);
    CHECK(std::abs(std::abs(m.sv_coef[1]) - alpha) < 1e-9);
}

TEST_CASE("nearest-neighbor with k = 1 memorizes its training set") {
    const Dataset train_set = blobs(50, 31);
    const ClassifierModel m =
        train(ClassifierKind::KNN, Hyperparams{{"k", 1.0}}, train_set, 7);
    CHECK(evaluate(m, train_set).accuracy == 1.0);
}

TEST_CASE("a single informative coordinate collects all the importance") {
    const Dataset train_set = one_split(100, 41);
    const ClassifierModel m =
        train(ClassifierKind::DecisionTree, default_hyperparams(ClassifierKind::DecisionTree),
              train_set, 7);
    CHECK(evaluate(m, train_set).accuracy == 1.0);

    const auto imp = feature_importance(m);
    REQUIRE_FALSE(imp.empty());
    CHECK(imp[0].first == 3);
    CHECK(imp[0].second >= 0.99);
    double total = 0.0;
    for (const auto& [idx, w] : imp) total += w;
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(std::is_sorted(imp.begin(), imp.end(), [](const auto& a, const auto& b) {
        return a.second > b.second;
    }));
}

TEST_CASE("importance queries on non-tree kinds are rejected") {
    const Dataset train_set = blobs(20, 51);
    const ClassifierModel m = train(ClassifierKind::GNB, {}, train_set, 7);
    CHECK_THROWS_AS(feature_importance(m), std::invalid_argument);
}

TEST_CASE("ensembles honor their size settings and normalize importance") {
    const Dataset train_set = blobs(100, 61);
    const ClassifierModel rf = train(ClassifierKind::RandomForest,
                                     default_hyperparams(ClassifierKind::RandomForest),
                                     train_set, 7);
    CHECK(rf.trees.size() == 50);
    const ClassifierModel ada = train(ClassifierKind::AdaBoost,
                                      default_hyperparams(ClassifierKind::AdaBoost),
                                      train_set, 7);
    CHECK(ada.trees.size() == ada.alphas.size());
    CHECK(ada.trees.size() == 50);
    for (const ClassifierModel* m : {&rf, &ada}) {
        const auto imp = feature_importance(*m);
        double total = 0.0;
        for (const auto& [idx, w] : imp) total += w;
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("models restrict themselves to their feature subset") {
    const Dataset train_set = blobs(100, 71);
    const ClassifierModel m = train(ClassifierKind::LDA, {}, train_set, 7, {0, 3, 7});
    CHECK(m.feature_indices == std::vector<int>{0, 3, 7});

    FeatureVector a = train_set.samples[0].features;
    FeatureVector b = a;
    b[12] = a[12] + 100.0; // untouched dimension
    CHECK(predict_score(m, a) == predict_score(m, b));
}

TEST_CASE("persistence round-trips scores bitwise for every kind") {
    const Dataset train_set = blobs(100, 81);
    const Dataset val_set = blobs(25, 82);
    const fs::path dir = fs::temp_directory_path() / "loopgrade_test_models";
    fs::remove_all(dir);
    fs::create_directories(dir);

    for (const ClassifierKind kind : all_classifier_kinds()) {
        CAPTURE(kind_name(kind));
        const ClassifierModel m = train(kind, default_hyperparams(kind), train_set, 7);
        const fs::path path = dir / (kind_name(kind) + ".json");
        save_model(m, path);
        const ClassifierModel back = load_model(path);
        CHECK(back.kind == m.kind);
        CHECK(back.feature_indices == m.feature_indices);
        for (const LabeledSample& s : val_set.samples)
            CHECK(predict_score(back, s.features) == predict_score(m, s.features));

        const std::uint64_t first = fnv1a_file(path);
        save_model(back, path);
        CHECK(fnv1a_file(path) == first);
    }
}

TEST_CASE("fold assignment is a balanced, seed-stable partition") {
    const std::vector<int> fold = cv_fold_assignment(103, 5, 3);
    REQUIRE(fold.size() == 103);
    std::size_t count[5] = {};
    for (const int f : fold) {
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        ++count[static_cast<std::size_t>(f)];
    }
    for (const std::size_t c : count) {
        CHECK(c >= 20);
        CHECK(c <= 21);
    }
    CHECK(cv_fold_assignment(103, 5, 3) == fold);
    CHECK(cv_fold_assignment(103, 5, 4) != fold);
}

TEST_CASE("hyperparameter search is deterministic and stays in range") {
    const Dataset d = blobs(60, 91);
    const SearchResult r1 = random_search(ClassifierKind::KNN, d, 5, 3, 11);
    const SearchResult r2 = random_search(ClassifierKind::KNN, d, 5, 3, 11);
    CHECK(r1.hp == r2.hp);
    CHECK(r1.cv_accuracy == r2.cv_accuracy);
    const double k = r1.hp.at("k");
    CHECK(k >= 1.0);
    CHECK(k <= 29.0);
    CHECK(std::fmod(k, 2.0) == 1.0); // odd neighbor counts only

    const SearchResult rt = random_search(ClassifierKind::DecisionTree, d, 4, 3, 13);
    CHECK(rt.hp.at("max_depth") >= 1.0);
    CHECK(rt.cv_accuracy > 0.5);
}

TEST_CASE("top-k retraining with k = 30 reproduces the full model") {
    const Dataset train_set = blobs(100, 111);
    const Dataset val_set = blobs(50, 112);
    const Hyperparams hp = default_hyperparams(ClassifierKind::DecisionTree);
    const auto study =
        topk_study(ClassifierKind::DecisionTree, hp, train_set, val_set, {1, 30}, 17);
    REQUIRE(study.size() == 2);
    CHECK(study[0].first == 1);
    CHECK(study[1].first == 30);

    const ClassifierModel full = train(ClassifierKind::DecisionTree, hp, train_set, 17);
    CHECK(study[1].second == evaluate(full, val_set).accuracy);
    CHECK(study[0].second <= study[1].second);
}
