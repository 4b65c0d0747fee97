#include "btcactor/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "btcactor/error.hpp"

namespace btcactor::learn {

using json = nlohmann::json;

const std::array<std::string, kNumClasses>& class_order() {
    static const std::array<std::string, kNumClasses> order = {"gambling", "random", "ransom"};
    return order;
}

int class_index(const std::string& label) {
    const auto& order = class_order();
    for (int i = 0; i < kNumClasses; ++i)
        if (order[i] == label) return i;
    return -1;
}

std::vector<int> argmax_classes(const std::vector<Proba>& probs) {
    std::vector<int> out;
    out.reserve(probs.size());
    for (const auto& p : probs)
        out.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
    return out;
}

namespace {

double get_param(const Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void normalize(Proba& p) {
    double s = p[0] + p[1] + p[2];
    if (s <= 0.0) {
        p = {1.0 / 3, 1.0 / 3, 1.0 / 3};
        return;
    }
    for (double& v : p) v /= s;
}

// Feature standardizer shared by the margin-based models.
struct Scaler {
    std::vector<double> mean, scale;

    void fit(const Rows& X) {
        const size_t d = X.empty() ? 0 : X[0].size();
        mean.assign(d, 0.0);
        scale.assign(d, 1.0);
        for (const auto& r : X)
            for (size_t j = 0; j < d; ++j) mean[j] += r[j];
        for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(X.size());
        std::vector<double> var(d, 0.0);
        for (const auto& r : X)
            for (size_t j = 0; j < d; ++j) var[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        for (size_t j = 0; j < d; ++j) {
            var[j] /= static_cast<double>(X.size());
            scale[j] = var[j] > 1e-24 ? std::sqrt(var[j]) : 1.0;
        }
    }

    std::vector<double> transform(const std::vector<double>& r) const {
        std::vector<double> out(r.size());
        for (size_t j = 0; j < r.size(); ++j) out[j] = (r[j] - mean[j]) / scale[j];
        return out;
    }

    json to_json() const { return {{"mean", mean}, {"scale", scale}}; }
    void from_json(const json& j) {
        mean = j.at("mean").get<std::vector<double>>();
        scale = j.at("scale").get<std::vector<double>>();
    }
};

void check_fit_input(const Rows& X, const Labels& y) {
    if (X.empty()) fail_data("classifier fit: empty matrix");
    if (X.size() != y.size()) fail_internal("classifier fit: X/y size mismatch");
    bool seen[kNumClasses] = {false, false, false};
    int distinct = 0;
    for (int label : y) {
        if (label < 0 || label >= kNumClasses) fail_internal("classifier fit: label out of range");
        if (!seen[label]) {
            seen[label] = true;
            ++distinct;
        }
    }
    if (distinct < 2) fail_data("classifier fit: single-class input");
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

class GaussianNB final : public Classifier {
public:
    explicit GaussianNB(const Params&) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        const size_t d = X[0].size();
        for (int k = 0; k < kNumClasses; ++k) {
            mean_[k].assign(d, 0.0);
            var_[k].assign(d, 0.0);
            count_[k] = 0;
        }
        for (size_t i = 0; i < X.size(); ++i) {
            ++count_[y[i]];
            for (size_t j = 0; j < d; ++j) mean_[y[i]][j] += X[i][j];
        }
        for (int k = 0; k < kNumClasses; ++k)
            if (count_[k] > 0)
                for (size_t j = 0; j < d; ++j) mean_[k][j] /= count_[k];
        for (size_t i = 0; i < X.size(); ++i)
            for (size_t j = 0; j < d; ++j) {
                double dlt = X[i][j] - mean_[y[i]][j];
                var_[y[i]][j] += dlt * dlt;
            }
        double max_var = 0.0;
        for (int k = 0; k < kNumClasses; ++k)
            for (size_t j = 0; j < d; ++j) {
                if (count_[k] > 0) var_[k][j] /= count_[k];
                max_var = std::max(max_var, var_[k][j]);
            }
        double eps = 1e-9 * std::max(max_var, 1e-12);
        for (int k = 0; k < kNumClasses; ++k) {
            prior_[k] = count_[k] > 0 ? static_cast<double>(count_[k]) / X.size() : 1e-12;
            for (size_t j = 0; j < d; ++j) var_[k][j] += eps;
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out;
        out.reserve(X.size());
        for (const auto& r : X) {
            double logp[kNumClasses];
            for (int k = 0; k < kNumClasses; ++k) {
                double lp = std::log(prior_[k]);
                for (size_t j = 0; j < r.size(); ++j) {
                    double dlt = r[j] - mean_[k][j];
                    lp += -0.5 * std::log(2.0 * M_PI * var_[k][j]) - dlt * dlt / (2.0 * var_[k][j]);
                }
                logp[k] = lp;
            }
            double mx = std::max({logp[0], logp[1], logp[2]});
            Proba p;
            for (int k = 0; k < kNumClasses; ++k) p[k] = std::exp(logp[k] - mx);
            normalize(p);
            out.push_back(p);
        }
        return out;
    }

    const char* name() const override { return "naive_bayes"; }
    Params params() const override { return {}; }

    json state() const override {
        return {{"mean", mean_}, {"var", var_}, {"prior", prior_}, {"count", count_}};
    }
    void restore(const json& j) override {
        for (int k = 0; k < kNumClasses; ++k) {
            mean_[k] = j.at("mean")[k].get<std::vector<double>>();
            var_[k] = j.at("var")[k].get<std::vector<double>>();
            prior_[k] = j.at("prior")[k].get<double>();
            count_[k] = j.at("count")[k].get<int>();
        }
    }

private:
    std::array<std::vector<double>, kNumClasses> mean_, var_;
    std::array<double, kNumClasses> prior_{};
    std::array<int, kNumClasses> count_{};
};

// ---------------------------------------------------------------------------
// Multinomial logistic regression (softmax, L2, full-batch GD with momentum)

class LogisticRegressionImpl final : public Classifier {
public:
    explicit LogisticRegressionImpl(const Params& p)
        : l2_(get_param(p, "l2", 1e-3)), iters_(static_cast<int>(get_param(p, "iters", 800))) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        scaler_.fit(X);
        const size_t n = X.size(), d = X[0].size();
        Rows Z;
        Z.reserve(n);
        for (const auto& r : X) Z.push_back(scaler_.transform(r));

        w_.assign(kNumClasses, std::vector<double>(d + 1, 0.0));  // last slot = bias
        std::vector<std::vector<double>> vel(kNumClasses, std::vector<double>(d + 1, 0.0));
        const double lr = 0.5, momentum = 0.9;
        for (int it = 0; it < iters_; ++it) {
            std::vector<std::vector<double>> grad(kNumClasses, std::vector<double>(d + 1, 0.0));
            for (size_t i = 0; i < n; ++i) {
                Proba p = scores_to_proba(Z[i]);
                for (int k = 0; k < kNumClasses; ++k) {
                    double g = p[k] - (y[i] == k ? 1.0 : 0.0);
                    for (size_t j = 0; j < d; ++j) grad[k][j] += g * Z[i][j];
                    grad[k][d] += g;
                }
            }
            for (int k = 0; k < kNumClasses; ++k)
                for (size_t j = 0; j <= d; ++j) {
                    double g = grad[k][j] / static_cast<double>(n);
                    if (j < d) g += l2_ * w_[k][j];
                    vel[k][j] = momentum * vel[k][j] - lr * g;
                    w_[k][j] += vel[k][j];
                }
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out;
        out.reserve(X.size());
        for (const auto& r : X) out.push_back(scores_to_proba(scaler_.transform(r)));
        return out;
    }

    const char* name() const override { return "logistic_regression"; }
    Params params() const override { return {{"l2", l2_}, {"iters", static_cast<double>(iters_)}}; }

    json state() const override { return {{"w", w_}, {"scaler", scaler_.to_json()}}; }
    void restore(const json& j) override {
        w_ = j.at("w").get<std::vector<std::vector<double>>>();
        scaler_.from_json(j.at("scaler"));
    }

private:
    Proba scores_to_proba(const std::vector<double>& z) const {
        double s[kNumClasses];
        for (int k = 0; k < kNumClasses; ++k) {
            double acc = w_[k].back();
            for (size_t j = 0; j < z.size(); ++j) acc += w_[k][j] * z[j];
            s[k] = acc;
        }
        double mx = std::max({s[0], s[1], s[2]});
        Proba p;
        for (int k = 0; k < kNumClasses; ++k) p[k] = std::exp(s[k] - mx);
        normalize(p);
        return p;
    }

    double l2_;
    int iters_;
    std::vector<std::vector<double>> w_;
    Scaler scaler_;
};

// ---------------------------------------------------------------------------
// CART trees shared by the forest and the boosting models

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    Proba dist = {0, 0, 0};  // classification leaf: class weight share
    double value = 0.0;      // regression leaf
};

struct TreeConfig {
    int max_depth = 0;     // 0 = unlimited
    int min_leaf = 1;
    int max_features = 0;  // 0 = all features at every split
};

class DecisionTree {
public:
    std::vector<TreeNode> nodes;

    // Classification fit with optional sample weights (Gini impurity).
    void fit_classification(const Rows& X, const Labels& y, const std::vector<double>& w,
                            const TreeConfig& cfg, std::mt19937_64& rng) {
        nodes.clear();
        std::vector<int> idx(X.size());
        std::iota(idx.begin(), idx.end(), 0);
        build_cls(X, y, w, idx, cfg, rng, 0);
    }

    // Regression fit on residuals (squared error).
    void fit_regression(const Rows& X, const std::vector<double>& r, const TreeConfig& cfg,
                        std::mt19937_64& rng) {
        nodes.clear();
        std::vector<int> idx(X.size());
        std::iota(idx.begin(), idx.end(), 0);
        build_reg(X, r, idx, cfg, rng, 0);
    }

    const TreeNode& leaf_for(const std::vector<double>& x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i];
    }

    // Replace every regression leaf value via a function of its sample set.
    template <typename Fn>
    void reassign_leaves(const Rows& X, Fn&& leaf_value) {
        std::vector<std::vector<int>> members(nodes.size());
        for (size_t i = 0; i < X.size(); ++i) {
            int node = 0;
            while (nodes[node].feature >= 0)
                node = X[i][nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                                          : nodes[node].right;
            members[node].push_back(static_cast<int>(i));
        }
        for (size_t node = 0; node < nodes.size(); ++node)
            if (nodes[node].feature < 0 && !members[node].empty())
                nodes[node].value = leaf_value(members[node]);
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& n : nodes)
            arr.push_back({{"f", n.feature},
                           {"t", n.threshold},
                           {"l", n.left},
                           {"r", n.right},
                           {"d", n.dist},
                           {"v", n.value}});
        return arr;
    }
    void from_json(const json& j) {
        nodes.clear();
        for (const auto& jn : j) {
            TreeNode n;
            n.feature = jn.at("f").get<int>();
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<int>();
            n.right = jn.at("r").get<int>();
            n.dist = jn.at("d").get<Proba>();
            n.value = jn.at("v").get<double>();
            nodes.push_back(n);
        }
    }

private:
    std::vector<int> candidate_features(size_t d, const TreeConfig& cfg, std::mt19937_64& rng) {
        std::vector<int> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        if (cfg.max_features > 0 && static_cast<size_t>(cfg.max_features) < d) {
            std::shuffle(feats.begin(), feats.end(), rng);
            feats.resize(cfg.max_features);
            std::sort(feats.begin(), feats.end());
        }
        return feats;
    }

    int build_cls(const Rows& X, const Labels& y, const std::vector<double>& w,
                  const std::vector<int>& idx, const TreeConfig& cfg, std::mt19937_64& rng,
                  int depth) {
        Proba total = {0, 0, 0};
        for (int i : idx) total[y[i]] += w[i];
        double wsum = total[0] + total[1] + total[2];

        auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.dist = total;
            if (wsum > 0)
                for (double& v : leaf.dist) v /= wsum;
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        };

        bool pure = total[0] == wsum || total[1] == wsum || total[2] == wsum;
        if (pure || idx.size() < static_cast<size_t>(2 * cfg.min_leaf) ||
            (cfg.max_depth > 0 && depth >= cfg.max_depth))
            return make_leaf();

        const double parent_gini =
            1.0 - (total[0] * total[0] + total[1] * total[1] + total[2] * total[2]) / (wsum * wsum);

        int best_f = -1;
        double best_thr = 0, best_score = parent_gini - 1e-12;
        for (int f : candidate_features(X[0].size(), cfg, rng)) {
            std::vector<int> order = idx;
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return X[a][f] < X[b][f]; });
            Proba left = {0, 0, 0};
            double lw = 0;
            for (size_t i = 0; i + 1 < order.size(); ++i) {
                left[y[order[i]]] += w[order[i]];
                lw += w[order[i]];
                if (X[order[i]][f] == X[order[i + 1]][f]) continue;
                if (i + 1 < static_cast<size_t>(cfg.min_leaf) ||
                    order.size() - i - 1 < static_cast<size_t>(cfg.min_leaf))
                    continue;
                double rw = wsum - lw;
                if (lw <= 0 || rw <= 0) continue;
                double gl = 1.0, gr = 1.0;
                for (int k = 0; k < kNumClasses; ++k) {
                    double rk = total[k] - left[k];
                    gl -= (left[k] / lw) * (left[k] / lw);
                    gr -= (rk / rw) * (rk / rw);
                }
                double score = (lw * gl + rw * gr) / wsum;
                if (score < best_score) {
                    best_score = score;
                    best_f = f;
                    best_thr = 0.5 * (X[order[i]][f] + X[order[i + 1]][f]);
                }
            }
        }
        if (best_f < 0) return make_leaf();

        std::vector<int> li, ri;
        for (int i : idx) (X[i][best_f] <= best_thr ? li : ri).push_back(i);
        if (li.empty() || ri.empty()) return make_leaf();

        int me = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[me].feature = best_f;
        nodes[me].threshold = best_thr;
        int l = build_cls(X, y, w, li, cfg, rng, depth + 1);
        int r = build_cls(X, y, w, ri, cfg, rng, depth + 1);
        nodes[me].left = l;
        nodes[me].right = r;
        return me;
    }

    int build_reg(const Rows& X, const std::vector<double>& rsd, const std::vector<int>& idx,
                  const TreeConfig& cfg, std::mt19937_64& rng, int depth) {
        double sum = 0;
        for (int i : idx) sum += rsd[i];
        const double n = static_cast<double>(idx.size());

        auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.value = sum / n;
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        };

        if (idx.size() < static_cast<size_t>(2 * cfg.min_leaf) ||
            (cfg.max_depth > 0 && depth >= cfg.max_depth))
            return make_leaf();

        int best_f = -1;
        double best_thr = 0, best_gain = 1e-12;
        const double parent_term = sum * sum / n;
        for (int f : candidate_features(X[0].size(), cfg, rng)) {
            std::vector<int> order = idx;
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return X[a][f] < X[b][f]; });
            double lsum = 0;
            for (size_t i = 0; i + 1 < order.size(); ++i) {
                lsum += rsd[order[i]];
                if (X[order[i]][f] == X[order[i + 1]][f]) continue;
                size_t ln = i + 1, rn = order.size() - ln;
                if (ln < static_cast<size_t>(cfg.min_leaf) || rn < static_cast<size_t>(cfg.min_leaf))
                    continue;
                double rsum = sum - lsum;
                double gain = lsum * lsum / ln + rsum * rsum / rn - parent_term;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = 0.5 * (X[order[i]][f] + X[order[i + 1]][f]);
                }
            }
        }
        if (best_f < 0) return make_leaf();

        std::vector<int> li, ri;
        for (int i : idx) (X[i][best_f] <= best_thr ? li : ri).push_back(i);
        if (li.empty() || ri.empty()) return make_leaf();

        int me = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[me].feature = best_f;
        nodes[me].threshold = best_thr;
        int l = build_reg(X, rsd, li, cfg, rng, depth + 1);
        int r = build_reg(X, rsd, ri, cfg, rng, depth + 1);
        nodes[me].left = l;
        nodes[me].right = r;
        return me;
    }
};

// ---------------------------------------------------------------------------
// Random forest

class RandomForest final : public Classifier {
public:
    RandomForest(const Params& p, uint64_t seed)
        : trees_(static_cast<int>(get_param(p, "trees", 150))),
          max_depth_(static_cast<int>(get_param(p, "max_depth", 0))),
          seed_(seed) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        forest_.assign(trees_, {});
        const size_t n = X.size();
        const int mtry =
            std::max(1, static_cast<int>(std::round(std::sqrt(static_cast<double>(X[0].size())))));
        TreeConfig cfg{max_depth_, 1, mtry};
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trees_; ++t) {
            std::mt19937_64 rng(seed_ * 0x9e3779b97f4a7c15ULL + t);
            std::uniform_int_distribution<size_t> pick(0, n - 1);
            Rows bx;
            Labels by;
            bx.reserve(n);
            by.reserve(n);
            for (size_t i = 0; i < n; ++i) {
                size_t j = pick(rng);
                bx.push_back(X[j]);
                by.push_back(y[j]);
            }
            std::vector<double> w(n, 1.0);
            forest_[t].fit_classification(bx, by, w, cfg, rng);
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out(X.size(), Proba{0, 0, 0});
        for (size_t i = 0; i < X.size(); ++i) {
            for (const auto& tree : forest_) {
                const TreeNode& leaf = tree.leaf_for(X[i]);
                for (int k = 0; k < kNumClasses; ++k) out[i][k] += leaf.dist[k];
            }
            normalize(out[i]);
        }
        return out;
    }

    const char* name() const override { return "random_forest"; }
    Params params() const override {
        return {{"trees", static_cast<double>(trees_)}, {"max_depth", static_cast<double>(max_depth_)}};
    }

    json state() const override {
        json arr = json::array();
        for (const auto& t : forest_) arr.push_back(t.to_json());
        return {{"forest", arr}};
    }
    void restore(const json& j) override {
        forest_.clear();
        for (const auto& jt : j.at("forest")) {
            DecisionTree t;
            t.from_json(jt);
            forest_.push_back(std::move(t));
        }
        trees_ = static_cast<int>(forest_.size());
    }

private:
    int trees_;
    int max_depth_;
    uint64_t seed_;
    std::vector<DecisionTree> forest_;
};

// ---------------------------------------------------------------------------
// Gradient boosting, multiclass deviance with Newton leaf updates

class GradientBoosting final : public Classifier {
public:
    GradientBoosting(const Params& p, uint64_t seed)
        : rounds_(static_cast<int>(get_param(p, "rounds", 100))),
          depth_(static_cast<int>(get_param(p, "depth", 3))),
          lr_(get_param(p, "learning_rate", 0.1)),
          seed_(seed) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        const size_t n = X.size();
        double counts[kNumClasses] = {0, 0, 0};
        for (int label : y) counts[label] += 1.0;
        for (int k = 0; k < kNumClasses; ++k)
            base_[k] = std::log(std::max(counts[k], 0.5) / static_cast<double>(n));

        std::vector<Proba> F(n);
        for (auto& f : F) f = base_;
        stages_.clear();
        std::mt19937_64 rng(seed_ * 0x9e3779b97f4a7c15ULL + 1);
        TreeConfig cfg{depth_, 2, 0};

        for (int m = 0; m < rounds_; ++m) {
            std::vector<Proba> P(n);
            for (size_t i = 0; i < n; ++i) P[i] = softmax(F[i]);
            std::array<DecisionTree, kNumClasses> stage;
            for (int k = 0; k < kNumClasses; ++k) {
                std::vector<double> resid(n);
                for (size_t i = 0; i < n; ++i) resid[i] = (y[i] == k ? 1.0 : 0.0) - P[i][k];
                stage[k].fit_regression(X, resid, cfg, rng);
                // Newton step per leaf for the multiclass deviance.
                stage[k].reassign_leaves(X, [&](const std::vector<int>& members) {
                    double num = 0, den = 0;
                    for (int i : members) {
                        num += resid[i];
                        den += std::fabs(resid[i]) * (1.0 - std::fabs(resid[i]));
                    }
                    if (den < 1e-12) return 0.0;
                    return (kNumClasses - 1.0) / kNumClasses * num / den;
                });
                for (size_t i = 0; i < n; ++i) F[i][k] += lr_ * stage[k].leaf_for(X[i]).value;
            }
            stages_.push_back(std::move(stage));
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out;
        out.reserve(X.size());
        for (const auto& x : X) {
            Proba f = base_;
            for (const auto& stage : stages_)
                for (int k = 0; k < kNumClasses; ++k) f[k] += lr_ * stage[k].leaf_for(x).value;
            out.push_back(softmax(f));
        }
        return out;
    }

    const char* name() const override { return "gradient_boosting"; }
    Params params() const override {
        return {{"rounds", static_cast<double>(rounds_)},
                {"depth", static_cast<double>(depth_)},
                {"learning_rate", lr_}};
    }

    json state() const override {
        json arr = json::array();
        for (const auto& stage : stages_) {
            json s = json::array();
            for (const auto& t : stage) s.push_back(t.to_json());
            arr.push_back(s);
        }
        return {{"base", base_}, {"stages", arr}, {"lr", lr_}};
    }
    void restore(const json& j) override {
        base_ = j.at("base").get<Proba>();
        lr_ = j.at("lr").get<double>();
        stages_.clear();
        for (const auto& js : j.at("stages")) {
            std::array<DecisionTree, kNumClasses> stage;
            for (int k = 0; k < kNumClasses; ++k) stage[k].from_json(js[k]);
            stages_.push_back(std::move(stage));
        }
    }

private:
    static Proba softmax(const Proba& f) {
        double mx = std::max({f[0], f[1], f[2]});
        Proba p;
        for (int k = 0; k < kNumClasses; ++k) p[k] = std::exp(f[k] - mx);
        normalize(p);
        return p;
    }

    int rounds_;
    int depth_;
    double lr_;
    uint64_t seed_;
    Proba base_ = {0, 0, 0};
    std::vector<std::array<DecisionTree, kNumClasses>> stages_;
};

// ---------------------------------------------------------------------------
// Adaptive boosting (SAMME) over shallow trees

class AdaBoost final : public Classifier {
public:
    AdaBoost(const Params& p, uint64_t seed)
        : rounds_(static_cast<int>(get_param(p, "rounds", 100))),
          depth_(static_cast<int>(get_param(p, "depth", 2))),
          seed_(seed) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        const size_t n = X.size();
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        trees_.clear();
        alphas_.clear();
        std::mt19937_64 rng(seed_ * 0x9e3779b97f4a7c15ULL + 2);
        TreeConfig cfg{depth_, 1, 0};

        for (int m = 0; m < rounds_; ++m) {
            DecisionTree tree;
            tree.fit_classification(X, y, w, cfg, rng);
            double err = 0;
            std::vector<int> pred(n);
            for (size_t i = 0; i < n; ++i) {
                const Proba& d = tree.leaf_for(X[i]).dist;
                pred[i] = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
                if (pred[i] != y[i]) err += w[i];
            }
            constexpr double chance = 1.0 - 1.0 / kNumClasses;
            if (err >= chance) break;           // weak learner no better than chance
            err = std::max(err, 1e-12);
            double alpha = std::log((1.0 - err) / err) + std::log(kNumClasses - 1.0);
            trees_.push_back(std::move(tree));
            alphas_.push_back(alpha);
            if (err <= 1e-12) break;            // perfect fit, nothing left to reweight
            double wsum = 0;
            for (size_t i = 0; i < n; ++i) {
                if (pred[i] != y[i]) w[i] *= std::exp(alpha);
                wsum += w[i];
            }
            for (double& wi : w) wi /= wsum;
        }
        if (trees_.empty()) {  // fall back to a single tree fit
            DecisionTree tree;
            tree.fit_classification(X, y, w, cfg, rng);
            trees_.push_back(std::move(tree));
            alphas_.push_back(1.0);
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out;
        out.reserve(X.size());
        for (const auto& x : X) {
            Proba votes = {0, 0, 0};
            for (size_t m = 0; m < trees_.size(); ++m) {
                const Proba& d = trees_[m].leaf_for(x).dist;
                int k = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
                votes[k] += alphas_[m];
            }
            normalize(votes);
            out.push_back(votes);
        }
        return out;
    }

    const char* name() const override { return "adaboost"; }
    Params params() const override {
        return {{"rounds", static_cast<double>(rounds_)}, {"depth", static_cast<double>(depth_)}};
    }

    json state() const override {
        json arr = json::array();
        for (const auto& t : trees_) arr.push_back(t.to_json());
        return {{"trees", arr}, {"alphas", alphas_}};
    }
    void restore(const json& j) override {
        trees_.clear();
        for (const auto& jt : j.at("trees")) {
            DecisionTree t;
            t.from_json(jt);
            trees_.push_back(std::move(t));
        }
        alphas_ = j.at("alphas").get<std::vector<double>>();
    }

private:
    int rounds_;
    int depth_;
    uint64_t seed_;
    std::vector<DecisionTree> trees_;
    std::vector<double> alphas_;
};

// ---------------------------------------------------------------------------
// Linear SVM, one-vs-rest hinge loss via SGD, Platt-calibrated probabilities

class LinearSvc final : public Classifier {
public:
    LinearSvc(const Params& p, uint64_t seed)
        : c_(get_param(p, "c", 1.0)),
          epochs_(static_cast<int>(get_param(p, "epochs", 120))),
          seed_(seed) {}

    void fit(const Rows& X, const Labels& y) override {
        check_fit_input(X, y);
        scaler_.fit(X);
        const size_t n = X.size(), d = X[0].size();
        Rows Z;
        Z.reserve(n);
        for (const auto& r : X) Z.push_back(scaler_.transform(r));

        std::mt19937_64 rng(seed_ * 0x9e3779b97f4a7c15ULL + 3);
        const double lambda = 1.0 / (c_ * static_cast<double>(n));
        for (int k = 0; k < kNumClasses; ++k) {
            std::vector<double>& w = w_[k];
            w.assign(d, 0.0);
            b_[k] = 0.0;
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            int64_t t = 0;
            for (int e = 0; e < epochs_; ++e) {
                std::shuffle(order.begin(), order.end(), rng);
                for (int i : order) {
                    ++t;
                    const double eta = 1.0 / (lambda * static_cast<double>(t));
                    const double yi = y[i] == k ? 1.0 : -1.0;
                    double margin = b_[k];
                    for (size_t j = 0; j < d; ++j) margin += w[j] * Z[i][j];
                    for (size_t j = 0; j < d; ++j) w[j] *= 1.0 - eta * lambda;
                    if (yi * margin < 1.0) {
                        for (size_t j = 0; j < d; ++j) w[j] += eta * yi * Z[i][j];
                        b_[k] += eta * yi * 0.1;  // small unregularized bias step
                    }
                }
            }
            platt_fit(k, Z, y);
        }
    }

    std::vector<Proba> predict_proba(const Rows& X) const override {
        std::vector<Proba> out;
        out.reserve(X.size());
        for (const auto& r : X) {
            auto z = scaler_.transform(r);
            Proba p;
            for (int k = 0; k < kNumClasses; ++k)
                p[k] = platt_prob(k, decision(k, z));
            normalize(p);
            out.push_back(p);
        }
        return out;
    }

    const char* name() const override { return "svm"; }
    Params params() const override {
        return {{"c", c_}, {"epochs", static_cast<double>(epochs_)}};
    }

    json state() const override {
        return {{"w", w_}, {"b", b_}, {"pa", platt_a_}, {"pb", platt_b_},
                {"scaler", scaler_.to_json()}};
    }
    void restore(const json& j) override {
        for (int k = 0; k < kNumClasses; ++k) {
            w_[k] = j.at("w")[k].get<std::vector<double>>();
            b_[k] = j.at("b")[k].get<double>();
            platt_a_[k] = j.at("pa")[k].get<double>();
            platt_b_[k] = j.at("pb")[k].get<double>();
        }
        scaler_.from_json(j.at("scaler"));
    }

private:
    double decision(int k, const std::vector<double>& z) const {
        double s = b_[k];
        for (size_t j = 0; j < z.size(); ++j) s += w_[k][j] * z[j];
        return s;
    }

    double platt_prob(int k, double score) const {
        double t = platt_a_[k] * score + platt_b_[k];
        return 1.0 / (1.0 + std::exp(t));
    }

    // Platt scaling: logistic fit of P(in class | score) with smoothed targets.
    void platt_fit(int k, const Rows& Z, const Labels& y) {
        const size_t n = Z.size();
        std::vector<double> scores(n);
        double n_pos = 0, n_neg = 0;
        for (size_t i = 0; i < n; ++i) {
            scores[i] = decision(k, Z[i]);
            (y[i] == k ? n_pos : n_neg) += 1.0;
        }
        const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
        const double t_neg = 1.0 / (n_neg + 2.0);
        double a = 0.0, b = std::log((n_neg + 1.0) / (n_pos + 1.0));
        for (int iter = 0; iter < 100; ++iter) {
            double g_a = 0, g_b = 0, h_aa = 1e-12, h_ab = 0, h_bb = 1e-12;
            for (size_t i = 0; i < n; ++i) {
                double t = y[i] == k ? t_pos : t_neg;
                double p = 1.0 / (1.0 + std::exp(a * scores[i] + b));
                double dif = p - t;
                g_a += dif * -scores[i];
                g_b += dif * -1.0;
                double w = std::max(p * (1.0 - p), 1e-12);
                h_aa += w * scores[i] * scores[i];
                h_ab += w * scores[i];
                h_bb += w;
            }
            double det = h_aa * h_bb - h_ab * h_ab;
            if (std::fabs(det) < 1e-15) break;
            double da = (g_a * h_bb - g_b * h_ab) / det;
            double db = (g_b * h_aa - g_a * h_ab) / det;
            a -= da;
            b -= db;
            if (std::fabs(da) + std::fabs(db) < 1e-10) break;
        }
        platt_a_[k] = a;
        platt_b_[k] = b;
    }

    double c_;
    int epochs_;
    uint64_t seed_;
    std::array<std::vector<double>, kNumClasses> w_;
    std::array<double, kNumClasses> b_{};
    std::array<double, kNumClasses> platt_a_{}, platt_b_{};
    Scaler scaler_;
};

} // namespace

const std::vector<std::string>& base_classifier_names() {
    static const std::vector<std::string> names = {
        "naive_bayes",   "random_forest",       "gradient_boosting",
        "adaboost",      "logistic_regression", "svm",
    };
    return names;
}

std::unique_ptr<Classifier> make_classifier(const std::string& name, const Params& params,
                                            uint64_t seed) {
    if (name == "naive_bayes") return std::make_unique<GaussianNB>(params);
    if (name == "logistic_regression") return std::make_unique<LogisticRegressionImpl>(params);
    if (name == "random_forest") return std::make_unique<RandomForest>(params, seed);
    if (name == "gradient_boosting") return std::make_unique<GradientBoosting>(params, seed);
    if (name == "adaboost") return std::make_unique<AdaBoost>(params, seed);
    if (name == "svm") return std::make_unique<LinearSvc>(params, seed);
    fail_usage("unknown classifier '" + name + "'");
}

std::vector<Params> default_grid(const std::string& name) {
    if (name == "naive_bayes") return {{}};
    if (name == "logistic_regression") return {{{"l2", 1e-4}}, {{"l2", 1e-2}}};
    if (name == "random_forest")
        return {{{"trees", 150}, {"max_depth", 0}}, {{"trees", 150}, {"max_depth", 8}}};
    if (name == "gradient_boosting") return {{{"rounds", 100}, {"depth", 3}, {"learning_rate", 0.1}}};
    if (name == "adaboost") return {{{"rounds", 100}, {"depth", 1}}, {{"rounds", 100}, {"depth", 2}}};
    if (name == "svm") return {{{"c", 0.5}}, {{"c", 2.0}}};
    fail_usage("unknown classifier '" + name + "'");
}

nlohmann::json classifier_to_json(const Classifier& c) {
    return {{"name", c.name()}, {"params", c.params()}, {"state", c.state()}};
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j, uint64_t seed) {
    auto c = make_classifier(j.at("name").get<std::string>(), j.at("params").get<Params>(), seed);
    c->restore(j.at("state"));
    return c;
}

} // namespace btcactor::learn
