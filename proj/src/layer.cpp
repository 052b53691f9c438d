#include "isadm/layer.hpp"

#include "isadm/errors.hpp"
#include "isadm/intel.hpp"
#include "json_support.hpp"

#include <algorithm>

namespace isadm {

using detail::json;

Layer merge(const std::vector<Layer>& layers, const std::string& merged_name) {
    if (layers.empty()) {
        throw DataError("merge: empty layer list");
    }
    Layer out;
    out.name = merged_name;
    out.domain_label = layers.front().domain_label;
    for (const auto& layer : layers) {
        if (layer.domain_label != out.domain_label) {
            throw DataError("merge: mismatched domain labels \"" + out.domain_label +
                            "\" vs \"" + layer.domain_label + "\"");
        }
        for (const auto& [technique_id, score] : layer.scores) {
            out.scores[technique_id] += score;
        }
    }
    std::erase_if(out.scores, [](const auto& entry) { return entry.second == 0; });
    return out;
}

std::vector<FrequencyRow> frequency_table(const Layer& layer, const IntelDataset* dataset) {
    std::vector<FrequencyRow> rows;
    rows.reserve(layer.scores.size());
    for (const auto& [technique_id, score] : layer.scores) {
        FrequencyRow row;
        row.technique_id = technique_id;
        row.score = score;
        if (dataset) {
            if (auto it = dataset->techniques.find(technique_id);
                it != dataset->techniques.end()) {
                row.technique_name = it->second.name;
                row.tactics.assign(it->second.tactics.begin(), it->second.tactics.end());
            }
        }
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.technique_id < b.technique_id;
    });
    return rows;
}

std::string export_navigator(const Layer& layer) {
    nlohmann::ordered_json doc;
    doc["name"] = layer.name;
    doc["versions"] = {{"layer", "4.5"}};
    doc["domain"] = layer.domain_label;
    doc["techniques"] = nlohmann::ordered_json::array();
    for (const auto& [technique_id, score] : layer.scores) { // std::map: id-ascending
        nlohmann::ordered_json entry;
        entry["techniqueID"] = technique_id;
        entry["score"] = score;
        doc["techniques"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

Layer import_navigator(std::string_view text, std::vector<std::string>* warnings) {
    json doc = detail::parse_json(text, "navigator layer");
    if (!doc.is_object()) {
        throw DataError("navigator layer: top level must be a JSON object");
    }
    Layer layer;
    layer.name = detail::require_string(doc, "name", "navigator layer");
    layer.domain_label = detail::require_string(doc, "domain", "navigator layer");
    const json& techniques = detail::require_key(doc, "techniques", "navigator layer");
    if (!techniques.is_array()) {
        throw DataError("navigator layer: \"techniques\" must be an array");
    }
    for (const auto& entry : techniques) {
        std::string id = detail::require_string(entry, "techniqueID", "navigator technique");
        if (!is_valid_technique_id(id)) {
            throw DataError("navigator layer: malformed technique id \"" + id + "\"");
        }
        auto it = entry.find("score");
        if (it == entry.end()) {
            if (warnings) {
                warnings->push_back("navigator layer: dropping \"" + id + "\" (no score)");
            }
            continue;
        }
        if (!it->is_number_integer()) {
            throw DataError("navigator layer: score for \"" + id + "\" must be an integer");
        }
        int score = it->get<int>();
        if (score < 0) {
            throw DataError("navigator layer: negative score for \"" + id + "\"");
        }
        if (score == 0) {
            if (warnings) {
                warnings->push_back("navigator layer: dropping \"" + id + "\" (score 0)");
            }
            continue;
        }
        layer.scores[id] += score;
    }
    return layer;
}

} // namespace isadm
