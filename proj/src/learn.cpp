#include "btcactor/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace btcactor::learn {

std::vector<std::string> LabeledDataset::groups() const {
    std::set<std::string> g;
    for (const auto& [kind, m] : kinds)
        for (const auto& r : m.rows) g.insert(r.group);
    return {g.begin(), g.end()};
}

std::map<std::string, int> LabeledDataset::group_labels() const {
    std::map<std::string, int> labels;
    for (const auto& [kind, m] : kinds) {
        for (const auto& r : m.rows) {
            int c = class_index(r.label);
            if (c < 0) fail_data("unknown class label '" + r.label + "' for group '" + r.group + "'");
            auto [it, inserted] = labels.emplace(r.group, c);
            if (!inserted && it->second != c)
                fail_data("group '" + r.group + "' labeled inconsistently across kinds");
        }
    }
    return labels;
}

namespace {

std::array<std::vector<std::string>, kNumClasses> groups_by_class(
    const std::map<std::string, int>& labels) {
    std::array<std::vector<std::string>, kNumClasses> by_class;
    for (const auto& [g, c] : labels) by_class[c].push_back(g);
    return by_class;  // map iteration keeps each list sorted
}

LabeledDataset subset_dataset(const LabeledDataset& ds, const std::set<std::string>& keep) {
    LabeledDataset out;
    for (const auto& [kind, m] : ds.kinds) {
        FeatureMatrix sm;
        sm.kind = m.kind;
        sm.schema = m.schema;
        for (const auto& r : m.rows)
            if (keep.count(r.group)) sm.rows.push_back(r);
        out.kinds.emplace(kind, std::move(sm));
    }
    return out;
}

} // namespace

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds,
                                                           double test_fraction, uint64_t seed) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        fail_data("test fraction must be in (0,1): empty split side");
    auto labels = ds.group_labels();
    auto by_class = groups_by_class(labels);

    std::set<std::string> test_groups;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < kNumClasses; ++c) {
        auto& g = by_class[c];
        if (g.empty()) continue;
        if (g.size() < 2)
            fail_data(std::string("class '") + class_order()[c] + "' has fewer than 2 groups");
        std::shuffle(g.begin(), g.end(), rng);
        size_t n_test = static_cast<size_t>(std::lround(test_fraction * static_cast<double>(g.size())));
        n_test = std::clamp<size_t>(n_test, 1, g.size() - 1);
        for (size_t i = 0; i < n_test; ++i) test_groups.insert(g[i]);
    }
    if (test_groups.empty()) fail_data("empty test set");

    std::set<std::string> train_groups;
    for (const auto& [g, c] : labels)
        if (!test_groups.count(g)) train_groups.insert(g);
    return {subset_dataset(ds, train_groups), subset_dataset(ds, test_groups)};
}

std::map<std::string, int> make_folds(const std::map<std::string, int>& group_labels, int folds,
                                      uint64_t seed) {
    if (folds < 2) fail_usage("need at least 2 folds");
    auto by_class = groups_by_class(group_labels);
    std::map<std::string, int> fold_of;
    std::mt19937_64 rng(seed ^ 0xf01d5eedULL);
    for (int c = 0; c < kNumClasses; ++c) {
        auto& g = by_class[c];
        std::shuffle(g.begin(), g.end(), rng);
        for (size_t i = 0; i < g.size(); ++i) fold_of[g[i]] = static_cast<int>(i % folds);
    }
    return fold_of;
}

EvalReport evaluate_predictions(const Labels& y_true, const Labels& y_pred) {
    if (y_true.empty()) fail_data("evaluate: empty data");
    if (y_true.size() != y_pred.size()) fail_internal("evaluate: size mismatch");
    EvalReport r;
    for (size_t i = 0; i < y_true.size(); ++i) ++r.confusion[y_true[i]][y_pred[i]];

    double recall_sum = 0;
    int present = 0;
    const double n = static_cast<double>(y_true.size());
    for (int k = 0; k < kNumClasses; ++k) {
        int support = 0, predicted = 0, correct = r.confusion[k][k];
        for (int j = 0; j < kNumClasses; ++j) {
            support += r.confusion[k][j];
            predicted += r.confusion[j][k];
        }
        if (support == 0) continue;
        ++present;
        double recall = static_cast<double>(correct) / support;
        double precision = predicted > 0 ? static_cast<double>(correct) / predicted : 0.0;
        recall_sum += recall;
        r.weighted_recall += support / n * recall;
        r.weighted_precision += support / n * precision;
    }
    r.balanced_accuracy = present > 0 ? recall_sum / present : 0.0;
    return r;
}

namespace {

// Probability triple -> stacking features: drop the last class's column.
void append_meta_features(std::vector<double>& row, const Proba& p) {
    for (int k = 0; k + 1 < kNumClasses; ++k) row.push_back(p[k]);
}

struct KindRows {
    Rows X;
    Labels y;
    std::vector<std::string> groups;
    std::vector<int> fold;
};

KindRows kind_rows(const FeatureMatrix& m, const std::map<std::string, int>& fold_of) {
    KindRows kr;
    for (const auto& r : m.rows) {
        kr.X.push_back(r.values);
        int c = class_index(r.label);
        if (c < 0) fail_data("unknown class label '" + r.label + "'");
        kr.y.push_back(c);
        kr.groups.push_back(r.group);
        kr.fold.push_back(fold_of.at(r.group));
    }
    return kr;
}

void require_all_classes(const Labels& y, const std::string& where) {
    bool seen[kNumClasses] = {};
    for (int c : y) seen[c] = true;
    for (int k = 0; k < kNumClasses; ++k)
        if (!seen[k])
            fail_data("fold with a missing class (" + std::string(class_order()[k]) + ") in " + where);
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t h = seed;
    for (uint64_t v : {a + 1, b + 1, c + 1}) {
        h ^= v * 0x9e3779b97f4a7c15ULL;
        h = (h ^ (h >> 31)) * 0xbf58476d1ce4e5b9ULL;
    }
    return h;
}

// Out-of-fold probabilities for one classifier spec over the given rows.
std::vector<Proba> oof_probs(const std::string& name, const Params& params, const KindRows& kr,
                             const std::vector<int>& fold_labels, uint64_t seed) {
    std::vector<Proba> oof(kr.X.size(), Proba{0, 0, 0});
    for (int f : fold_labels) {
        Rows trX;
        Labels trY;
        std::vector<size_t> va;
        for (size_t i = 0; i < kr.X.size(); ++i) {
            if (kr.fold[i] == f) {
                va.push_back(i);
            } else {
                trX.push_back(kr.X[i]);
                trY.push_back(kr.y[i]);
            }
        }
        if (va.empty()) continue;
        require_all_classes(trY, name + " out-of-fold training split");
        auto c = make_classifier(name, params, mix_seed(seed, std::hash<std::string>{}(name), f, 17));
        c->fit(trX, trY);
        Rows vaX;
        for (size_t i : va) vaX.push_back(kr.X[i]);
        auto probs = c->predict_proba(vaX);
        for (size_t j = 0; j < va.size(); ++j) oof[va[j]] = probs[j];
    }
    return oof;
}

std::vector<int> fold_label_set(const KindRows& kr) {
    std::set<int> s(kr.fold.begin(), kr.fold.end());
    return {s.begin(), s.end()};
}

// Fit a full stacked model on the rows of `kr` (bases on everything, meta on
// internal out-of-fold probabilities).
StackedKindModel fit_stacked(GraphKind kind, const KindRows& kr,
                             const std::vector<std::pair<std::string, Params>>& base_specs,
                             uint64_t seed) {
    StackedKindModel sm;
    sm.kind = kind;
    auto folds = fold_label_set(kr);
    if (folds.size() < 2) fail_data("stacking needs at least 2 folds of data");

    Rows meta_X(kr.X.size());
    for (size_t b = 0; b < base_specs.size(); ++b) {
        auto oof = oof_probs(base_specs[b].first, base_specs[b].second, kr, folds,
                             mix_seed(seed, b, 101, 3));
        for (size_t i = 0; i < kr.X.size(); ++i) append_meta_features(meta_X[i], oof[i]);
    }
    sm.meta = make_classifier("logistic_regression", {{"l2", 1e-3}}, mix_seed(seed, 7, 7, 7));
    sm.meta->fit(meta_X, kr.y);

    for (size_t b = 0; b < base_specs.size(); ++b) {
        auto c = make_classifier(base_specs[b].first, base_specs[b].second,
                                 mix_seed(seed, b, 211, 5));
        c->fit(kr.X, kr.y);
        sm.bases.push_back(std::move(c));
    }
    return sm;
}

} // namespace

std::vector<Proba> StackedKindModel::predict_proba(const Rows& X) const {
    Rows meta_X(X.size());
    for (const auto& base : bases) {
        auto probs = base->predict_proba(X);
        for (size_t i = 0; i < X.size(); ++i) append_meta_features(meta_X[i], probs[i]);
    }
    return meta->predict_proba(meta_X);
}

ModelBundle::Prediction ModelBundle::predict(
    const std::map<GraphKind, std::vector<double>>& features_by_kind) const {
    Prediction out;
    std::vector<double> row;
    row.reserve(final_width());
    for (GraphKind kind : kinds) {
        auto it = features_by_kind.find(kind);
        if (it == features_by_kind.end()) {
            out.imputed.push_back(kind);
            append_meta_features(row, Proba{1.0 / 3, 1.0 / 3, 1.0 / 3});
            continue;
        }
        auto probs = stacked.at(kind).predict_proba({it->second});
        append_meta_features(row, probs[0]);
    }
    auto probs = final_meta->predict_proba({row});
    out.probs = probs[0];
    out.cls = argmax_classes(probs)[0];
    return out;
}

ModelBundle train_model(const LabeledDataset& train_superset, const TrainOptions& opt,
                        TrainReport* report) {
    ModelBundle bundle;
    bundle.folds = opt.folds;
    bundle.seed = opt.seed;
    bundle.kinds = learn_kinds();
    if (opt.base_set.empty()) fail_usage("base classifier set is empty");

    auto labels = train_superset.group_labels();
    {
        int present = 0;
        std::array<int, kNumClasses> counts{};
        for (const auto& [g, c] : labels) ++counts[c];
        for (int k = 0; k < kNumClasses; ++k)
            if (counts[k] > 0) ++present;
        if (present < 2) fail_data("training data has fewer than 2 classes");
    }
    auto fold_of = make_folds(labels, opt.folds, opt.seed);

    // Frozen per-kind schemas from the training matrices.
    std::map<GraphKind, FeatureMatrix> schemad;
    for (GraphKind kind : bundle.kinds) {
        auto it = train_superset.kinds.find(kind);
        if (it == train_superset.kinds.end() || it->second.rows.empty())
            fail_data(std::string("training data missing kind ") + to_string(kind));
        bundle.schemas[kind] = build_schema(kind, it->second, opt.prune_threshold);
        schemad[kind] = it->second.select(bundle.schemas[kind]);
    }

    TrainReport local_report;
    TrainReport& rep = report ? *report : local_report;

    const int n_kinds = static_cast<int>(bundle.kinds.size());
    std::vector<std::vector<BaseCvCell>> base_cv(n_kinds);
    std::vector<std::vector<std::pair<std::string, Params>>> chosen_specs(n_kinds);

    // Initial stage: small grid search per base classifier and kind.
    std::exception_ptr train_error;
#pragma omp parallel for schedule(dynamic)
    for (int ki = 0; ki < n_kinds; ++ki) {
        try {
            GraphKind kind = bundle.kinds[ki];
            KindRows kr = kind_rows(schemad.at(kind), fold_of);
            auto folds = fold_label_set(kr);
            for (size_t b = 0; b < opt.base_set.size(); ++b) {
                const std::string& name = opt.base_set[b];
                BaseCvCell best{name, {}, -1.0};
                for (const Params& params : default_grid(name)) {
                    auto oof = oof_probs(name, params, kr, folds, mix_seed(opt.seed, ki, b, 31));
                    auto pred = argmax_classes(oof);
                    double score = evaluate_predictions(kr.y, pred).balanced_accuracy;
                    if (score > best.balanced_accuracy) {
                        best.balanced_accuracy = score;
                        best.chosen = params;
                    }
                }
                base_cv[ki].push_back(best);
                chosen_specs[ki].emplace_back(name, base_cv[ki].back().chosen);
            }
        } catch (...) {
#pragma omp critical
            if (!train_error) train_error = std::current_exception();
        }
    }
    if (train_error) std::rethrow_exception(train_error);

    for (int ki = 0; ki < n_kinds; ++ki) {
        rep.base_cv[bundle.kinds[ki]] = base_cv[ki];
        for (const auto& cell : base_cv[ki])
            rep.best_base_cv = std::max(rep.best_base_cv, cell.balanced_accuracy);
    }

    // Intermediate stage: per-kind stacking, plus outer out-of-fold stacked
    // probabilities that feed the final fusion stage.
    auto group_list = train_superset.groups();
    std::map<std::string, size_t> group_slot;
    for (size_t i = 0; i < group_list.size(); ++i) group_slot[group_list[i]] = i;

    // oof_kind_probs[kind][group_slot] = stacked OOF probability (or missing).
    std::vector<std::vector<std::optional<Proba>>> oof_kind_probs(
        n_kinds, std::vector<std::optional<Proba>>(group_list.size()));
    std::vector<std::optional<StackedKindModel>> full_models(n_kinds);
    std::vector<EvalReport> stacked_reports(n_kinds);

#pragma omp parallel for schedule(dynamic)
    for (int ki = 0; ki < n_kinds; ++ki) {
        try {
            GraphKind kind = bundle.kinds[ki];
            KindRows kr = kind_rows(schemad.at(kind), fold_of);
            auto folds = fold_label_set(kr);

            Labels oof_true, oof_pred;
            for (int f : folds) {
                KindRows sub;
                std::vector<size_t> va;
                for (size_t i = 0; i < kr.X.size(); ++i) {
                    if (kr.fold[i] == f) {
                        va.push_back(i);
                    } else {
                        sub.X.push_back(kr.X[i]);
                        sub.y.push_back(kr.y[i]);
                        sub.groups.push_back(kr.groups[i]);
                        sub.fold.push_back(kr.fold[i]);
                    }
                }
                if (va.empty()) continue;
                require_all_classes(sub.y, "stacked outer training split");
                auto sm = fit_stacked(kind, sub, chosen_specs[ki], mix_seed(opt.seed, ki, f, 77));
                Rows vaX;
                for (size_t i : va) vaX.push_back(kr.X[i]);
                auto probs = sm.predict_proba(vaX);
                for (size_t j = 0; j < va.size(); ++j) {
                    oof_kind_probs[ki][group_slot.at(kr.groups[va[j]])] = probs[j];
                    oof_true.push_back(kr.y[va[j]]);
                    oof_pred.push_back(static_cast<int>(
                        std::max_element(probs[j].begin(), probs[j].end()) - probs[j].begin()));
                }
            }
            stacked_reports[ki] = evaluate_predictions(oof_true, oof_pred);
            full_models[ki] = fit_stacked(kind, kr, chosen_specs[ki], mix_seed(opt.seed, ki, 999, 13));
        } catch (...) {
#pragma omp critical
            if (!train_error) train_error = std::current_exception();
        }
    }
    if (train_error) std::rethrow_exception(train_error);

    for (int ki = 0; ki < n_kinds; ++ki) {
        rep.stacked_cv[bundle.kinds[ki]] = stacked_reports[ki];
        rep.best_stacked_cv = std::max(rep.best_stacked_cv, stacked_reports[ki].balanced_accuracy);
        bundle.stacked.emplace(bundle.kinds[ki], std::move(*full_models[ki]));
    }

    // Final stage: fuse the six kinds' out-of-fold probabilities.
    Rows fusion_X;
    Labels fusion_y;
    std::vector<int> fusion_fold;
    for (size_t gi = 0; gi < group_list.size(); ++gi) {
        std::vector<double> row;
        row.reserve(bundle.final_width());
        for (int ki = 0; ki < n_kinds; ++ki) {
            if (oof_kind_probs[ki][gi]) {
                append_meta_features(row, *oof_kind_probs[ki][gi]);
            } else {
                append_meta_features(row, Proba{1.0 / 3, 1.0 / 3, 1.0 / 3});
                rep.notes.push_back("group " + group_list[gi] + ": kind " +
                                    to_string(bundle.kinds[ki]) + " imputed with uniform probabilities");
            }
        }
        fusion_X.push_back(std::move(row));
        fusion_y.push_back(labels.at(group_list[gi]));
        fusion_fold.push_back(fold_of.at(group_list[gi]));
    }

    bundle.final_meta =
        make_classifier("logistic_regression", {{"l2", 1e-3}}, mix_seed(opt.seed, 5, 5, 5));
    bundle.final_meta->fit(fusion_X, fusion_y);

    // Cross-validated balanced accuracy of the fusion stage over the same
    // folds, for the report.
    {
        std::set<int> folds(fusion_fold.begin(), fusion_fold.end());
        Labels cv_true, cv_pred;
        std::vector<double> fold_scores;
        for (int f : folds) {
            Rows trX, vaX;
            Labels trY, vaY;
            for (size_t i = 0; i < fusion_X.size(); ++i) {
                if (fusion_fold[i] == f) {
                    vaX.push_back(fusion_X[i]);
                    vaY.push_back(fusion_y[i]);
                } else {
                    trX.push_back(fusion_X[i]);
                    trY.push_back(fusion_y[i]);
                }
            }
            if (vaX.empty()) continue;
            require_all_classes(trY, "final fusion training split");
            auto meta = make_classifier("logistic_regression", {{"l2", 1e-3}},
                                        mix_seed(opt.seed, 6, f, 9));
            meta->fit(trX, trY);
            auto pred = argmax_classes(meta->predict_proba(vaX));
            fold_scores.push_back(evaluate_predictions(vaY, pred).balanced_accuracy);
            cv_true.insert(cv_true.end(), vaY.begin(), vaY.end());
            cv_pred.insert(cv_pred.end(), pred.begin(), pred.end());
        }
        rep.final_cv = evaluate_predictions(cv_true, cv_pred);
        rep.final_cv.fold_scores = fold_scores;
    }
    return bundle;
}

EvalReport evaluate_model(const ModelBundle& bundle, const LabeledDataset& test,
                          std::vector<std::string>* notes) {
    auto labels = test.group_labels();
    if (labels.empty()) fail_data("evaluate: empty data");

    std::map<GraphKind, FeatureMatrix> schemad;
    for (GraphKind kind : bundle.kinds) {
        auto it = test.kinds.find(kind);
        if (it != test.kinds.end() && !it->second.rows.empty())
            schemad[kind] = it->second.schema == bundle.schemas.at(kind)
                                ? it->second
                                : it->second.select(bundle.schemas.at(kind));
    }

    Labels y_true, y_pred;
    for (const auto& [group, label] : labels) {
        std::map<GraphKind, std::vector<double>> rows;
        for (const auto& [kind, m] : schemad)
            for (const auto& r : m.rows)
                if (r.group == group) rows[kind] = r.values;
        auto pred = bundle.predict(rows);
        if (notes)
            for (GraphKind kind : pred.imputed)
                notes->push_back("group " + group + ": kind " + to_string(kind) + " imputed");
        y_true.push_back(label);
        y_pred.push_back(pred.cls);
    }
    return evaluate_predictions(y_true, y_pred);
}

void write_eval_report(const EvalReport& r, std::ostream& out) {
    out << "metric,value\n";
    out << "balanced_accuracy," << r.balanced_accuracy << '\n';
    out << "weighted_precision," << r.weighted_precision << '\n';
    out << "weighted_recall," << r.weighted_recall << '\n';
    for (int i = 0; i < kNumClasses; ++i)
        for (int j = 0; j < kNumClasses; ++j)
            out << "confusion_" << class_order()[i] << '_' << class_order()[j] << ','
                << r.confusion[i][j] << '\n';
    for (size_t f = 0; f < r.fold_scores.size(); ++f)
        out << "fold_" << f << "_balanced_accuracy," << r.fold_scores[f] << '\n';
}

void write_train_report(const TrainReport& r, std::ostream& out) {
    out << "stage,kind,classifier,balanced_accuracy,weighted_precision,weighted_recall\n";
    for (const auto& [kind, cells] : r.base_cv)
        for (const auto& cell : cells)
            out << "base," << to_string(kind) << ',' << cell.classifier << ','
                << cell.balanced_accuracy << ",,\n";
    for (const auto& [kind, er] : r.stacked_cv)
        out << "stacking," << to_string(kind) << ",logistic_regression," << er.balanced_accuracy
            << ',' << er.weighted_precision << ',' << er.weighted_recall << '\n';
    out << "final,all,logistic_regression," << r.final_cv.balanced_accuracy << ','
        << r.final_cv.weighted_precision << ',' << r.final_cv.weighted_recall << '\n';
}

} // namespace btcactor::learn
