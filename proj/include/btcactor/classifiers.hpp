#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace btcactor::learn {

// Fixed class order (alphabetical); the last class's probability column is
// the one dropped when probabilities become stacking features.
constexpr int kNumClasses = 3;
const std::array<std::string, kNumClasses>& class_order();
int class_index(const std::string& label);  // -1 when unknown

using Rows = std::vector<std::vector<double>>;
using Labels = std::vector<int>;
using Proba = std::array<double, kNumClasses>;

using Params = std::map<std::string, double>;

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual void fit(const Rows& X, const Labels& y) = 0;
    virtual std::vector<Proba> predict_proba(const Rows& X) const = 0;
    virtual const char* name() const = 0;
    virtual nlohmann::json state() const = 0;
    virtual void restore(const nlohmann::json& j) = 0;
    virtual Params params() const = 0;
};

std::vector<int> argmax_classes(const std::vector<Proba>& probs);

// The six base classifiers of the initial stage.
const std::vector<std::string>& base_classifier_names();

std::unique_ptr<Classifier> make_classifier(const std::string& name, const Params& params,
                                            uint64_t seed);

// Small fixed hyperparameter grids searched during training.
std::vector<Params> default_grid(const std::string& name);

nlohmann::json classifier_to_json(const Classifier& c);
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j, uint64_t seed);

} // namespace btcactor::learn
