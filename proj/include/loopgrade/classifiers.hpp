#pragma once

#include "loopgrade/dataset.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace loopgrade {

enum class ClassifierKind { GNB, LDA, KNN, DecisionTree, RandomForest, AdaBoost, SvmRbf };

const std::array<ClassifierKind, 7>& all_classifier_kinds();
std::string kind_name(ClassifierKind kind);       // gnb, lda, knn, cart, rf, ada, svm
ClassifierKind kind_from_name(const std::string& name);

/// Kind-specific settings as a flat name->value map; integers are stored as
/// doubles and rounded on use. Unknown names are ignored by train().
using Hyperparams = std::map<std::string, double>;

Hyperparams default_hyperparams(ClassifierKind kind);

/// Per-feature standardization fitted on training data only. Zero-variance
/// features keep scale 1 (they carry no information and are reported).
struct Scaler {
    std::vector<double> mean;
    std::vector<double> sdev;

    bool empty() const { return mean.empty(); }
    /// Columns with zero variance keep scale 1 and are reported through
    /// `degenerate` (model-local column ids).
    void fit(const std::vector<double>& x, std::size_t n, std::size_t d,
             std::vector<int>* degenerate = nullptr);
    void apply(double* z, std::size_t d) const;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t label = 0; // leaf majority: 1 = OK
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<double> importance; // impurity decrease per (model-local) feature

    std::uint8_t predict(const double* z) const;
};

/// A trained classifier. feature_indices names the original feature columns
/// the model consumes (ascending); predict() projects full vectors itself.
struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::GNB;
    Hyperparams hp;
    std::vector<int> feature_indices;
    Scaler scaler; // empty for tree kinds, which are scale-free
    std::vector<std::string> notes;
    std::uint64_t seed = 0;

    bool constant = false; // degenerate single-class training set
    std::uint8_t constant_label = 0;

    // GNB / LDA
    std::vector<double> class_mean[2], class_var[2];
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> lin_w;
    double lin_b = 0.0;

    // KNN
    int knn_k = 0;
    std::vector<double> knn_x;
    std::vector<std::uint8_t> knn_y;

    // DecisionTree / RandomForest / AdaBoost
    std::vector<Tree> trees;
    std::vector<double> alphas; // AdaBoost stage weights

    // SVM-RBF
    double svm_gamma = 0.0, svm_b = 0.0;
    std::vector<double> sv;
    std::vector<double> sv_coef; // alpha_i * y_i

    std::size_t dim() const { return feature_indices.size(); }
};

/// Fits a model of the given kind. Deterministic under (hp, dataset, seed,
/// feature_indices); randomized learners split per-task streams from seed.
/// An empty feature_indices means all 30 features.
ClassifierModel train(ClassifierKind kind, const Hyperparams& hp, const Dataset& dataset,
                      std::uint64_t seed, std::vector<int> feature_indices = {});

bool predict(const ClassifierModel& model, const FeatureVector& fv);

/// Signed score, positive means OK; magnitude is kind-specific.
double predict_score(const ClassifierModel& model, const FeatureVector& fv);

struct EvalReport {
    double accuracy = 0.0;
    // confusion[row][col]: rows = true {OK, NOK}, cols = predicted {OK, NOK}
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
    double precision_ok = 0.0, recall_ok = 0.0;
    double precision_nok = 0.0, recall_nok = 0.0;
};

EvalReport evaluate(const ClassifierModel& model, const Dataset& dataset);

struct SearchResult {
    Hyperparams hp;
    double cv_accuracy = 0.0;
};

/// Random hyperparameter search over the published ranges with k-fold CV;
/// ties on mean accuracy go to the simpler configuration (fewer estimators,
/// then shallower depth, then smaller k, then stronger regularization).
SearchResult random_search(ClassifierKind kind, const Dataset& dataset, int iterations,
                           int folds, std::uint64_t seed);

/// Seed-deterministic fold assignment: a shuffled permutation dealt
/// round-robin, so folds are disjoint and cover the dataset.
std::vector<int> cv_fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Impurity-decrease importance in original feature space, normalized to
/// sum 1, sorted descending with ties broken by feature index. Tree kinds
/// only; throws std::invalid_argument otherwise.
std::vector<std::pair<int, double>> feature_importance(const ClassifierModel& model);

/// Retrains on the top-k important features for each k and evaluates on the
/// validation set. Selected indices are re-sorted ascending, so k = 30
/// reproduces the full training run exactly.
std::vector<std::pair<int, double>> topk_study(ClassifierKind kind, const Hyperparams& hp,
                                               const Dataset& train_set, const Dataset& val_set,
                                               const std::vector<int>& k_list,
                                               std::uint64_t seed);

/// Self-describing JSON persistence; predictions after a round-trip are
/// identical.
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

inline constexpr const char* kModelFormat = "loopgrade-model-v1";

} // namespace loopgrade
