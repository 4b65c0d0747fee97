#include "btcactor/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "btcactor/centrality.hpp"

namespace btcactor {

namespace cen = centrality;

const std::vector<std::string>& feature_superset() {
    static const std::vector<std::string> names = {
        "# of vertices",
        "# of edges",
        "sum of weights",
        "loops",
        "Degree(in)",
        "Degree(out)",
        "Degree(all)",
        "Neighborhood(1)",
        "Neighborhood(2)",
        "Closeness(wtd/in)",
        "Closeness(wtd/out)",
        "Closeness(wtd/all)",
        "Closeness(uwtd/in)",
        "Closeness(uwtd/out)",
        "Closeness(uwtd/all)",
        "Betweenness",
        "Page Rank",
        "cluster coefficient",
        "Coreness(IN)",
        "Coreness(OUT)",
        "Coreness(all)",
        "Coreness(IN)/n",
        "Coreness(OUT)/n",
        "Coreness(all)/n",
        "Hub",
        "Authority",
    };
    return names;
}

double FeatureVector::value_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    fail_internal("feature '" + name + "' not computed");
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::string>& names) const {
    std::vector<size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        auto it = std::find(schema.begin(), schema.end(), n);
        if (it == schema.end()) fail_data("feature '" + n + "' missing from matrix schema");
        idx.push_back(static_cast<size_t>(it - schema.begin()));
    }
    FeatureMatrix out;
    out.kind = kind;
    out.schema = names;
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
        FeatureRow nr{r.group, r.label, {}};
        nr.values.reserve(idx.size());
        for (size_t i : idx) nr.values.push_back(r.values[i]);
        out.rows.push_back(std::move(nr));
    }
    return out;
}

FeatureVector compute_features(const ActorGraph& g, GraphKind kind) {
    if (g.vertices.empty()) fail_data("compute_features: empty graph");

    // Remap actor ids to 0..n-1 in sorted order.
    std::unordered_map<ActorId, int> id;
    id.reserve(g.vertices.size() * 2);
    for (size_t i = 0; i < g.vertices.size(); ++i) id[g.vertices[i]] = static_cast<int>(i);
    auto cit = id.find(g.center);
    if (cit == id.end()) fail_data("compute_features: center not in graph");
    const int center = cit->second;

    std::vector<cen::Digraph::Edge> edges;
    edges.reserve(g.edges.size());
    for (const auto& e : g.edges) edges.push_back({id.at(e.src), id.at(e.dst), e.weight_btc});
    cen::Digraph dg(static_cast<int>(g.vertices.size()), std::move(edges));
    const int n = dg.size();

    double loops = 0, deg_in = 0, deg_out = 0;
    for (const auto& e : g.edges) {
        if (e.src == e.dst && id.at(e.src) == center) ++loops;
        if (id.at(e.dst) == center) ++deg_in;
        if (id.at(e.src) == center) ++deg_out;
    }

    auto pr = cen::pagerank(dg);
    auto hit = cen::hits(dg);
    auto core_in = cen::coreness(dg, cen::Mode::in);
    auto core_out = cen::coreness(dg, cen::Mode::out);
    auto core_all = cen::coreness(dg, cen::Mode::all);

    FeatureVector fv;
    fv.kind = kind;
    fv.actor = g.center;
    fv.names = feature_superset();
    fv.values = {
        static_cast<double>(n),
        static_cast<double>(g.edges.size()),
        g.total_weight_btc(),
        loops,
        deg_in,
        deg_out,
        deg_in + deg_out,
        static_cast<double>(cen::neighborhood_size(dg, center, 1)),
        static_cast<double>(cen::neighborhood_size(dg, center, 2)),
        cen::closeness(dg, center, cen::Mode::in, true),
        cen::closeness(dg, center, cen::Mode::out, true),
        cen::closeness(dg, center, cen::Mode::all, true),
        cen::closeness(dg, center, cen::Mode::in, false),
        cen::closeness(dg, center, cen::Mode::out, false),
        cen::closeness(dg, center, cen::Mode::all, false),
        cen::betweenness(dg, center),
        pr[center],
        cen::local_clustering(dg, center),
        static_cast<double>(core_in[center]),
        static_cast<double>(core_out[center]),
        static_cast<double>(core_all[center]),
        static_cast<double>(core_in[center]) / n,
        static_cast<double>(core_out[center]) / n,
        static_cast<double>(core_all[center]) / n,
        hit.hub[center],
        hit.authority[center],
    };
    for (double v : fv.values)
        if (!std::isfinite(v)) fail_internal("non-finite feature value");
    return fv;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // constant column: undefined -> uncorrelated
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> column(const FeatureMatrix& m, size_t j) {
    std::vector<double> c;
    c.reserve(m.rows.size());
    for (const auto& r : m.rows) c.push_back(r.values[j]);
    return c;
}

bool is_constant(const std::vector<double>& c) {
    for (double v : c)
        if (v != c.front()) return false;
    return true;
}

} // namespace

FeatureMatrix prune_correlated(const FeatureMatrix& m, double threshold,
                               std::vector<std::string>* flagged_constant) {
    if (m.rows.size() < 2) fail_data("prune_correlated: need at least 2 rows");
    if (!(threshold > 0.0 && threshold <= 1.0)) fail_usage("prune threshold must be in (0,1]");

    std::vector<size_t> kept;
    std::vector<std::vector<double>> kept_cols;
    for (size_t j = 0; j < m.schema.size(); ++j) {
        auto col = column(m, j);
        if (is_constant(col)) {
            if (flagged_constant) flagged_constant->push_back(m.schema[j]);
            kept.push_back(j);
            kept_cols.push_back(std::move(col));
            continue;
        }
        bool correlated = false;
        for (const auto& kc : kept_cols)
            if (std::fabs(pearson(col, kc)) > threshold) {
                correlated = true;
                break;
            }
        if (!correlated) {
            kept.push_back(j);
            kept_cols.push_back(std::move(col));
        }
    }
    std::vector<std::string> names;
    names.reserve(kept.size());
    for (size_t j : kept) names.push_back(m.schema[j]);
    return m.select(names);
}

namespace {

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v.front();
    double h = p * (static_cast<double>(v.size()) - 1.0);
    size_t lo = static_cast<size_t>(h);
    size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

} // namespace

std::vector<ClassSummary> summarize_by_class(const FeatureMatrix& m) {
    std::map<std::string, std::vector<size_t>> by_label;
    for (size_t i = 0; i < m.rows.size(); ++i) {
        if (m.rows[i].label.empty()) fail_data("summarize_by_class: unlabeled row");
        by_label[m.rows[i].label].push_back(i);
    }
    std::vector<ClassSummary> out;
    for (size_t j = 0; j < m.schema.size(); ++j) {
        for (const auto& [label, rows] : by_label) {
            std::vector<double> v;
            v.reserve(rows.size());
            double mean = 0;
            for (size_t i : rows) {
                v.push_back(m.rows[i].values[j]);
                mean += m.rows[i].values[j];
            }
            mean /= static_cast<double>(v.size());
            ClassSummary s;
            s.feature = m.schema[j];
            s.label = label;
            s.min = *std::min_element(v.begin(), v.end());
            s.max = *std::max_element(v.begin(), v.end());
            s.p25 = quantile(v, 0.25);
            s.median = quantile(v, 0.5);
            s.p75 = quantile(v, 0.75);
            s.mean = mean;
            s.count = v.size();
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_class_summary(const std::vector<ClassSummary>& rows, std::ostream& out) {
    out << "feature,label,min,p25,median,p75,max,mean,count\n";
    char buf[256];
    for (const auto& s : rows) {
        snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", s.min, s.p25, s.median,
                 s.p75, s.max, s.mean);
        out << s.feature << ',' << s.label << ',' << buf << ',' << s.count << '\n';
    }
}

const std::vector<std::string>& ego1_simple_schema() {
    static const std::vector<std::string> names = {
        "Closeness(wtd/out)", "sum of weights",     "Closeness(uwtd/out)", "# of vertices",
        "Closeness(wtd/in)",  "cluster coefficient", "Closeness(wtd/all)", "Closeness(uwtd/in)",
        "Coreness(all)",      "Authority",           "Coreness(IN)",
    };
    return names;
}

int schema_feature_count(GraphKind kind) {
    switch (kind) {
        case GraphKind::ego3: return 11;
        case GraphKind::ego3_simple: return 16;
        case GraphKind::ego2: return 13;
        case GraphKind::ego2_simple: return 16;
        case GraphKind::ego1: return 12;
        case GraphKind::ego1_simple: return 11;
        default: return static_cast<int>(feature_superset().size());
    }
}

std::vector<std::string> build_schema(GraphKind kind, const FeatureMatrix& superset_matrix,
                                      double threshold) {
    if (kind == GraphKind::ego1_simple) return ego1_simple_schema();

    FeatureMatrix pruned = prune_correlated(superset_matrix, threshold);
    std::vector<std::string> names = pruned.schema;
    const size_t target = static_cast<size_t>(schema_feature_count(kind));
    if (names.size() > target) {
        names.resize(target);
    } else if (names.size() < target) {
        for (const auto& f : superset_matrix.schema) {
            if (names.size() >= target) break;
            if (std::find(names.begin(), names.end(), f) == names.end()) names.push_back(f);
        }
    }
    return names;
}

void write_schema_set(const SchemaSet& s, std::ostream& out) {
    out << "btcactor-schema v1\n";
    for (const auto& [kind, names] : s) {
        out << '[' << to_string(kind) << "]\n";
        for (const auto& n : names) out << n << '\n';
    }
}

SchemaSet read_schema_set(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "btcactor-schema v1")
        fail_data("schema file: bad or missing version header");
    SchemaSet s;
    std::optional<GraphKind> current;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            auto kind = graph_kind_from_string(line.substr(1, line.size() - 2));
            if (!kind) fail_data("schema file: unknown graph kind " + line);
            current = kind;
            s[*current];
            continue;
        }
        if (!current) fail_data("schema file: feature before any [kind] section");
        s[*current].push_back(line);
    }
    return s;
}

void write_feature_matrix(const FeatureMatrix& m, std::ostream& out) {
    out << "actor,kind,label";
    for (const auto& n : m.schema) out << ',' << n;
    out << '\n';
    char buf[64];
    for (const auto& r : m.rows) {
        out << r.group << ',' << to_string(m.kind) << ',' << r.label;
        for (double v : r.values) {
            snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

FeatureMatrix read_feature_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail_data("feature matrix: empty file");
    auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "actor" || header[1] != "kind" || header[2] != "label")
        fail_data("feature matrix: bad header");
    FeatureMatrix m;
    m.schema.assign(header.begin() + 3, header.end());
    bool kind_set = false;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != header.size())
            fail_data("feature matrix line " + std::to_string(lineno) + ": wrong column count");
        auto kind = graph_kind_from_string(f[1]);
        if (!kind) fail_data("feature matrix line " + std::to_string(lineno) + ": bad kind");
        if (!kind_set) {
            m.kind = *kind;
            kind_set = true;
        } else if (*kind != m.kind) {
            fail_data("feature matrix line " + std::to_string(lineno) + ": mixed graph kinds");
        }
        FeatureRow r{f[0], f[2], {}};
        r.values.reserve(m.schema.size());
        for (size_t j = 3; j < f.size(); ++j) {
            try {
                r.values.push_back(std::stod(f[j]));
            } catch (const std::exception&) {
                fail_data("feature matrix line " + std::to_string(lineno) + ": bad number '" + f[j] + "'");
            }
        }
        m.rows.push_back(std::move(r));
    }
    return m;
}

} // namespace btcactor
