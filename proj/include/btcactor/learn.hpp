#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btcactor/classifiers.hpp"
#include "btcactor/features.hpp"

namespace btcactor::learn {

// Per-kind feature matrices sharing one population of whole-graph groups.
// A group (one seed actor) may be missing from a kind when that ego view was
// dropped, but its label is consistent wherever it appears.
struct LabeledDataset {
    std::map<GraphKind, FeatureMatrix> kinds;

    std::vector<std::string> groups() const;                 // sorted union
    std::map<std::string, int> group_labels() const;         // validated
};

// Group-level stratified split; every kind's rows for a group land on the
// same side.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds,
                                                           double test_fraction, uint64_t seed);

// Stratified group -> fold assignment shared by every CV consumer, so no
// group ever straddles a train/validation boundary anywhere in the pipeline.
std::map<std::string, int> make_folds(const std::map<std::string, int>& group_labels, int folds,
                                      uint64_t seed);

struct EvalReport {
    double balanced_accuracy = 0;
    double weighted_precision = 0;
    double weighted_recall = 0;
    std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // rows = true class
    std::vector<double> fold_scores;
};

EvalReport evaluate_predictions(const Labels& y_true, const Labels& y_pred);

// One kind's stacked model: fitted bases plus a linear meta-model over their
// out-of-fold class probabilities (last class's column dropped per base).
struct StackedKindModel {
    GraphKind kind = GraphKind::whole;
    std::vector<std::unique_ptr<Classifier>> bases;
    std::unique_ptr<Classifier> meta;

    size_t meta_width() const { return bases.size() * (kNumClasses - 1); }
    std::vector<Proba> predict_proba(const Rows& X) const;
};

struct TrainOptions {
    int folds = 5;
    uint64_t seed = 7;
    double prune_threshold = 0.95;
    std::vector<std::string> base_set = base_classifier_names();
};

struct BaseCvCell {
    std::string classifier;
    Params chosen;
    double balanced_accuracy = 0;
};

struct TrainReport {
    std::map<GraphKind, std::vector<BaseCvCell>> base_cv;   // Initial stage
    std::map<GraphKind, EvalReport> stacked_cv;             // Intermediate stage
    EvalReport final_cv;                                    // Stacking-bagging stage
    double best_base_cv = 0;
    double best_stacked_cv = 0;
    std::vector<std::string> notes;
};

struct ModelBundle {
    int version = 1;
    int folds = 5;
    uint64_t seed = 7;
    std::vector<GraphKind> kinds;
    SchemaSet schemas;
    std::map<GraphKind, StackedKindModel> stacked;
    std::unique_ptr<Classifier> final_meta;  // (kinds x 2)-wide linear fusion

    size_t final_width() const { return kinds.size() * (kNumClasses - 1); }

    struct Prediction {
        Proba probs{};
        int cls = 0;
        std::vector<GraphKind> imputed;  // kinds filled with uniform probabilities
    };
    // `features_by_kind` rows must already follow this bundle's schemas.
    Prediction predict(const std::map<GraphKind, std::vector<double>>& features_by_kind) const;
};

// Trains the full three-stage model on superset-schema matrices: builds the
// frozen per-kind schemas, grid-searches the base set per kind, fits per-kind
// stacking, then the cross-kind fusion model on out-of-fold probabilities.
ModelBundle train_model(const LabeledDataset& train_superset, const TrainOptions& opt,
                        TrainReport* report = nullptr);

// Applies the bundle to a labeled dataset (superset or schema'd matrices).
EvalReport evaluate_model(const ModelBundle& bundle, const LabeledDataset& test,
                          std::vector<std::string>* notes = nullptr);

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

void write_eval_report(const EvalReport& r, std::ostream& out);
void write_train_report(const TrainReport& r, std::ostream& out);

} // namespace btcactor::learn
