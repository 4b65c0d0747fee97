#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "btcactor/learn.hpp"

namespace btcactor::learn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) fail_data("cannot open '" + p.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        fail_data("bad JSON in '" + p.string() + "': " + e.what());
    }
    return j;
}

void write_text_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) fail_data("cannot write '" + p.string() + "'");
    out << text;
}

} // namespace

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "btcactor-model-bundle";
    manifest["version"] = bundle.version;
    manifest["folds"] = bundle.folds;
    manifest["seed"] = bundle.seed;
    manifest["class_order"] = class_order();
    json kinds = json::array();
    for (GraphKind k : bundle.kinds) kinds.push_back(to_string(k));
    manifest["kinds"] = kinds;
    write_text_file(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");

    std::ostringstream schema;
    write_schema_set(bundle.schemas, schema);
    write_text_file(fs::path(dir) / "schema.txt", schema.str());

    for (const auto& [kind, sm] : bundle.stacked) {
        json j;
        j["kind"] = to_string(kind);
        j["bases"] = json::array();
        for (const auto& b : sm.bases) j["bases"].push_back(classifier_to_json(*b));
        j["meta"] = classifier_to_json(*sm.meta);
        write_text_file(fs::path(dir) / (std::string("kind_") + to_string(kind) + ".json"),
                        j.dump() + "\n");
    }
    write_text_file(fs::path(dir) / "final_meta.json",
                    classifier_to_json(*bundle.final_meta).dump() + "\n");
}

ModelBundle load_bundle(const std::string& dir) {
    json manifest = read_json_file(fs::path(dir) / "manifest.json");
    if (manifest.value("format", "") != "btcactor-model-bundle")
        fail_data("'" + dir + "' is not a model bundle");
    ModelBundle bundle;
    bundle.version = manifest.at("version").get<int>();
    if (bundle.version != 1)
        fail_data("model bundle version " + std::to_string(bundle.version) + " not supported");
    auto order = manifest.at("class_order").get<std::vector<std::string>>();
    for (int i = 0; i < kNumClasses; ++i)
        if (order.at(i) != class_order()[i]) fail_data("model bundle class order mismatch");
    bundle.folds = manifest.at("folds").get<int>();
    bundle.seed = manifest.at("seed").get<uint64_t>();
    for (const auto& jk : manifest.at("kinds")) {
        auto kind = graph_kind_from_string(jk.get<std::string>());
        if (!kind) fail_data("model bundle: unknown kind " + jk.get<std::string>());
        bundle.kinds.push_back(*kind);
    }

    {
        std::ifstream in(fs::path(dir) / "schema.txt");
        if (!in) fail_data("model bundle missing schema.txt");
        bundle.schemas = read_schema_set(in);
    }

    for (GraphKind kind : bundle.kinds) {
        json j = read_json_file(fs::path(dir) / (std::string("kind_") + to_string(kind) + ".json"));
        StackedKindModel sm;
        sm.kind = kind;
        for (const auto& jb : j.at("bases"))
            sm.bases.push_back(classifier_from_json(jb, bundle.seed));
        sm.meta = classifier_from_json(j.at("meta"), bundle.seed);
        bundle.stacked.emplace(kind, std::move(sm));
    }
    bundle.final_meta = classifier_from_json(read_json_file(fs::path(dir) / "final_meta.json"),
                                             bundle.seed);
    return bundle;
}

} // namespace btcactor::learn
