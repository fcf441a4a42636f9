#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "sewnet/mesh.hpp"
#include "sewnet/pattern_io.hpp"

namespace sewnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Dataset directory layout:
//   <root>/patterns/<id>.json
//   <root>/meshes/<id>.obj
//   <root>/class_map.json
//   <root>/split.json
//   <root>/norm_stats.json        (written by prepare-data)
// ---------------------------------------------------------------------------

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test_seen;
    std::vector<std::string> test_unseen;
};

inline json split_to_json(const DatasetSplit& s) {
    return json{{"train", s.train},
                {"validation", s.validation},
                {"test_seen", s.test_seen},
                {"test_unseen", s.test_unseen}};
}

inline DatasetSplit split_from_json(const json& j) {
    DatasetSplit s;
    auto read = [&](const char* key, std::vector<std::string>& out) {
        if (!j.contains(key) || !j.at(key).is_array()) {
            throw ParseError(std::string("split: missing array '") + key + "'");
        }
        for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
    };
    read("train", s.train);
    read("validation", s.validation);
    read("test_seen", s.test_seen);
    read("test_unseen", s.test_unseen);
    return s;
}

struct DatasetSample {
    std::string id;
    SewingPattern pattern;
    TriMesh mesh;
};

struct Dataset {
    std::vector<DatasetSample> samples;
    std::map<std::string, std::size_t> by_id;
    PanelClassMap class_map;
    DatasetSplit split;
    std::string content_hash;

    const DatasetSample& sample(const std::string& id) const {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("dataset: unknown sample id '" + id + "'");
        return samples[it->second];
    }
};

inline void save_dataset(const Dataset& dataset, const std::string& root) {
    fs::create_directories(fs::path(root) / "patterns");
    fs::create_directories(fs::path(root) / "meshes");
    for (const auto& s : dataset.samples) {
        save_pattern_file(s.pattern, (fs::path(root) / "patterns" / (s.id + ".json")).string());
        save_obj(s.mesh, (fs::path(root) / "meshes" / (s.id + ".obj")).string());
    }
    save_class_map_file(dataset.class_map, (fs::path(root) / "class_map.json").string());
    std::ofstream split_out(fs::path(root) / "split.json");
    if (!split_out) throw IoError("cannot write split.json under " + root);
    split_out << split_to_json(dataset.split).dump(2) << "\n";
}

inline Dataset load_dataset(const std::string& root) {
    Dataset out;
    const fs::path base(root);
    if (!fs::exists(base / "split.json")) throw IoError("dataset: missing split.json under " + root);
    json split_doc;
    std::ifstream split_in(base / "split.json");
    split_in >> split_doc;
    out.split = split_from_json(split_doc);
    out.class_map = load_class_map_file((base / "class_map.json").string());

    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(base / "patterns")) {
        if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());

    std::uint64_t h = fnv1a64("sewnet-dataset-v1");
    for (const std::string& id : ids) {
        DatasetSample s;
        s.id = id;
        const std::string pattern_path = (base / "patterns" / (id + ".json")).string();
        std::ifstream pattern_in(pattern_path);
        std::stringstream buf;
        buf << pattern_in.rdbuf();
        const std::string text = buf.str();
        h = fnv1a64(id, h);
        h = fnv1a64(text, h);
        s.pattern = parse_pattern(text);
        const fs::path mesh_path = base / "meshes" / (id + ".obj");
        if (fs::exists(mesh_path)) s.mesh = load_obj(mesh_path.string());
        out.by_id.emplace(id, out.samples.size());
        out.samples.push_back(std::move(s));
    }
    h = fnv1a64(split_doc.dump(), h);
    out.content_hash = to_hex(h);
    return out;
}

/// Stable per-sample seed derived from the sample id alone, so clouds do not
/// depend on training configuration.
inline std::uint64_t sample_cloud_seed(const std::string& id) {
    return fnv1a64(id, fnv1a64("cloud-seed"));
}

}  // namespace sewnet
