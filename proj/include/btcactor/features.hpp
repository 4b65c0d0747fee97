#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btcactor/actorgraph.hpp"

namespace btcactor {

// Every feature the extractor computes, in the canonical schema order used
// for correlation pruning. Frozen per-kind schemas select from this superset.
const std::vector<std::string>& feature_superset();

struct FeatureVector {
    GraphKind kind = GraphKind::whole;
    ActorId actor = 0;
    std::vector<std::string> names;
    std::vector<double> values;

    double value_of(const std::string& name) const;
};

// One row per (whole graph, kind); `group` is the whole-graph identifier (the
// seed address), shared across kinds so splits can be made leakage-free.
struct FeatureRow {
    std::string group;
    std::string label;  // empty when unlabeled
    std::vector<double> values;
};

struct FeatureMatrix {
    GraphKind kind = GraphKind::whole;
    std::vector<std::string> schema;
    std::vector<FeatureRow> rows;

    FeatureMatrix select(const std::vector<std::string>& names) const;
};

// Full superset of basic statistics and centrality features of the center
// actor. No NaN/inf leaves this function; degenerate cases map to 0.
FeatureVector compute_features(const ActorGraph& g, GraphKind kind);

// Greedy scan in schema order: drop a feature whose absolute Pearson
// correlation with an already kept feature exceeds `threshold`. Constant
// columns correlate with nothing; they are kept and reported when `flagged`
// is supplied.
FeatureMatrix prune_correlated(const FeatureMatrix& m, double threshold,
                               std::vector<std::string>* flagged_constant = nullptr);

struct ClassSummary {
    std::string feature;
    std::string label;
    double min = 0, p25 = 0, median = 0, p75 = 0, max = 0, mean = 0;
    size_t count = 0;
};

// Per feature x class quantile table; quantiles use linear interpolation.
std::vector<ClassSummary> summarize_by_class(const FeatureMatrix& m);
void write_class_summary(const std::vector<ClassSummary>& rows, std::ostream& out);

// Versioned text schema: feature names per graph kind.
using SchemaSet = std::map<GraphKind, std::vector<std::string>>;

// The published 11-feature list for ego1_simple; pinned, never reconstructed.
const std::vector<std::string>& ego1_simple_schema();

// Target feature count per learn kind.
int schema_feature_count(GraphKind kind);

// Builds the frozen schema for one kind from its training matrix: the
// ego1_simple list is pinned; other kinds keep what survives correlation
// pruning at `threshold`, truncated or padded (with dropped features, in
// schema order) to the published count.
std::vector<std::string> build_schema(GraphKind kind, const FeatureMatrix& superset_matrix,
                                      double threshold);

void write_schema_set(const SchemaSet& s, std::ostream& out);
SchemaSet read_schema_set(std::istream& in);

// FeatureMatrix CSV: actor,kind,label then one column per schema feature.
void write_feature_matrix(const FeatureMatrix& m, std::ostream& out);
FeatureMatrix read_feature_matrix(std::istream& in);

} // namespace btcactor
