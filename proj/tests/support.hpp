#pragma once

#include "isadm/intel.hpp"
#include "isadm/layer.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path data_dir() {
    return std::filesystem::path(ISADM_DATA_DIR);
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    static std::mt19937_64 rng(std::random_device{}());
    for (int attempt = 0; attempt < 64; ++attempt) {
        auto candidate = base / ("isadm_" + tag + "_" + std::to_string(rng()));
        if (std::filesystem::create_directory(candidate)) return candidate;
    }
    throw std::runtime_error("cannot create temp dir");
}

inline std::string technique_id_for(int n, bool sub) {
    char buf[16];
    if (sub) {
        std::snprintf(buf, sizeof buf, "T1%03d.%03d", n % 1000, (n * 7) % 1000);
    } else {
        std::snprintf(buf, sizeof buf, "T1%03d", n % 1000);
    }
    return buf;
}

/// Random small dataset for merge-oracle style properties: up to
/// max_groups groups drawing from up to max_techniques technique ids.
inline isadm::IntelDataset random_dataset(std::mt19937& rng, int max_groups,
                                          int max_techniques) {
    isadm::IntelDataset dataset;
    dataset.version_label = "test";
    int technique_count = std::uniform_int_distribution<int>(1, max_techniques)(rng);
    std::vector<std::string> ids;
    for (int i = 0; i < technique_count; ++i) {
        std::string id = technique_id_for(i, i % 3 == 0);
        if (dataset.techniques.contains(id)) continue;
        isadm::Technique technique;
        technique.id = id;
        technique.name = "Technique " + std::to_string(i);
        technique.tactics = {"Execution"};
        dataset.techniques[id] = technique;
        ids.push_back(id);
    }
    int group_count = std::uniform_int_distribution<int>(1, max_groups)(rng);
    std::bernoulli_distribution member(0.4);
    for (int g = 0; g < group_count; ++g) {
        isadm::ThreatGroup group;
        group.id = "g" + std::to_string(g);
        group.name = "Group " + std::to_string(g);
        for (const auto& id : ids) {
            if (member(rng)) group.technique_ids.insert(id);
        }
        dataset.groups[group.id] = group;
    }
    return dataset;
}

inline isadm::Layer random_layer(std::mt19937& rng, int max_techniques, int max_score) {
    isadm::Layer layer;
    layer.name = "layer" + std::to_string(rng() % 1000);
    int n = std::uniform_int_distribution<int>(0, max_techniques)(rng);
    std::uniform_int_distribution<int> score(1, max_score);
    for (int i = 0; i < n; ++i) {
        layer.scores[technique_id_for(static_cast<int>(rng() % 400), rng() % 2 == 0)] =
            score(rng);
    }
    return layer;
}

} // namespace testsupport
