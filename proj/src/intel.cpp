#include "isadm/intel.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <cctype>

namespace isadm {

using detail::json;

bool is_valid_technique_id(std::string_view id) {
    // "T" + 4 digits, optional "." + 3 digits.
    if (id.size() != 5 && id.size() != 9) return false;
    if (id[0] != 'T') return false;
    for (size_t i = 1; i < 5; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    }
    if (id.size() == 5) return true;
    if (id[5] != '.') return false;
    for (size_t i = 6; i < 9; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    }
    return true;
}

IntelDataset load_dataset(std::string_view text) {
    json doc = detail::parse_json(text, "dataset document");
    if (!doc.is_object()) {
        throw DataError("dataset document: top level must be a JSON object");
    }
    detail::require_only_keys(doc, {"version_label", "techniques", "groups"},
                              "dataset document");

    IntelDataset dataset;
    dataset.version_label = detail::require_string(doc, "version_label", "dataset document");

    const json& techniques = detail::require_key(doc, "techniques", "dataset document");
    if (!techniques.is_array()) {
        throw DataError("dataset document: \"techniques\" must be an array");
    }
    for (const auto& obj : techniques) {
        detail::require_only_keys(obj, {"id", "name", "tactics"}, "technique");
        Technique technique;
        technique.id = detail::require_string(obj, "id", "technique");
        const std::string where = "technique \"" + technique.id + "\"";
        if (!is_valid_technique_id(technique.id)) {
            throw DataError(where + ": malformed technique id");
        }
        technique.name = detail::require_string(obj, "name", where);
        const json& tactics = detail::require_key(obj, "tactics", where);
        if (!tactics.is_array()) throw DataError(where + ": \"tactics\" must be an array");
        for (const auto& tactic : tactics) {
            if (!tactic.is_string()) throw DataError(where + ": tactics must be strings");
            technique.tactics.insert(tactic.get<std::string>());
        }
        if (technique.tactics.empty()) {
            throw DataError(where + ": tactics must be nonempty");
        }
        if (!dataset.techniques.emplace(technique.id, technique).second) {
            throw DataError("dataset document: duplicate technique id \"" + technique.id + "\"");
        }
    }

    const json& groups = detail::require_key(doc, "groups", "dataset document");
    if (!groups.is_array()) {
        throw DataError("dataset document: \"groups\" must be an array");
    }
    for (const auto& obj : groups) {
        detail::require_only_keys(obj, {"id", "name", "aliases", "description", "techniques"},
                                  "group");
        ThreatGroup group;
        group.id = detail::require_string(obj, "id", "group");
        const std::string where = "group \"" + group.id + "\"";
        group.name = detail::require_string(obj, "name", where);
        if (auto it = obj.find("aliases"); it != obj.end()) {
            if (!it->is_array()) throw DataError(where + ": \"aliases\" must be an array");
            for (const auto& alias : *it) {
                if (!alias.is_string()) throw DataError(where + ": aliases must be strings");
                group.aliases.insert(alias.get<std::string>());
            }
        }
        if (auto it = obj.find("description"); it != obj.end()) {
            if (!it->is_string()) throw DataError(where + ": \"description\" must be a string");
            group.description = it->get<std::string>();
        }
        if (auto it = obj.find("techniques"); it != obj.end()) {
            if (!it->is_array()) throw DataError(where + ": \"techniques\" must be an array");
            for (const auto& id : *it) {
                if (!id.is_string()) throw DataError(where + ": technique ids must be strings");
                std::string technique_id = id.get<std::string>();
                if (!dataset.techniques.contains(technique_id)) {
                    throw DataError(where + ": dangling technique reference \"" +
                                    technique_id + "\"");
                }
                group.technique_ids.insert(std::move(technique_id));
            }
        }
        if (!dataset.groups.emplace(group.id, group).second) {
            throw DataError("dataset document: duplicate group id \"" + group.id + "\"");
        }
    }
    return dataset;
}

std::string serialize_dataset(const IntelDataset& dataset) {
    nlohmann::ordered_json doc;
    doc["version_label"] = dataset.version_label;
    doc["techniques"] = nlohmann::ordered_json::array();
    for (const auto& [id, technique] : dataset.techniques) {
        nlohmann::ordered_json obj;
        obj["id"] = technique.id;
        obj["name"] = technique.name;
        obj["tactics"] = std::vector<std::string>(technique.tactics.begin(),
                                                  technique.tactics.end());
        doc["techniques"].push_back(std::move(obj));
    }
    doc["groups"] = nlohmann::ordered_json::array();
    for (const auto& [id, group] : dataset.groups) {
        nlohmann::ordered_json obj;
        obj["id"] = group.id;
        obj["name"] = group.name;
        obj["aliases"] = std::vector<std::string>(group.aliases.begin(), group.aliases.end());
        obj["description"] = group.description;
        obj["techniques"] = std::vector<std::string>(group.technique_ids.begin(),
                                                     group.technique_ids.end());
        doc["groups"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

std::vector<KeywordHit> search_groups(const IntelDataset& dataset,
                                      const std::vector<std::string>& keywords) {
    std::vector<std::string> trimmed;
    for (const auto& keyword : keywords) {
        std::string t = detail::trim(keyword);
        if (t.empty()) {
            throw ConfigError("search keywords must be nonempty");
        }
        trimmed.push_back(std::move(t));
    }
    if (trimmed.empty()) {
        throw ConfigError("search requires at least one keyword");
    }

    std::vector<KeywordHit> hits;
    for (const auto& [group_id, group] : dataset.groups) {
        std::string haystack = detail::to_lower(group.name);
        for (const auto& alias : group.aliases) {
            haystack += '\n' + detail::to_lower(alias);
        }
        haystack += '\n' + detail::to_lower(group.description);

        KeywordHit hit;
        hit.group_id = group_id;
        for (const auto& keyword : trimmed) {
            if (haystack.find(detail::to_lower(keyword)) != std::string::npos) {
                hit.matched_keywords.insert(keyword);
            }
        }
        if (!hit.matched_keywords.empty()) {
            hits.push_back(std::move(hit));
        }
    }
    std::sort(hits.begin(), hits.end(), [&dataset](const KeywordHit& a, const KeywordHit& b) {
        const std::string& an = dataset.groups.at(a.group_id).name;
        const std::string& bn = dataset.groups.at(b.group_id).name;
        if (an != bn) return an < bn;
        return a.group_id < b.group_id;
    });
    return hits;
}

std::vector<std::string> parse_allow_list(std::string_view text) {
    json doc = detail::parse_json(text, "allow-list document");
    if (!doc.is_object()) {
        throw DataError("allow-list document: top level must be a JSON object");
    }
    detail::require_only_keys(doc, {"include_groups"}, "allow-list document");
    const json& include = detail::require_key(doc, "include_groups", "allow-list document");
    if (!include.is_array()) {
        throw DataError("allow-list document: \"include_groups\" must be an array");
    }
    std::vector<std::string> out;
    for (const auto& id : include) {
        if (!id.is_string()) {
            throw DataError("allow-list document: group ids must be strings");
        }
        out.push_back(id.get<std::string>());
    }
    return out;
}

std::vector<KeywordHit> apply_allow_list(const std::vector<KeywordHit>& hits,
                                         const std::vector<std::string>& include_groups) {
    std::vector<KeywordHit> out;
    for (const auto& hit : hits) {
        if (std::find(include_groups.begin(), include_groups.end(), hit.group_id) !=
            include_groups.end()) {
            out.push_back(hit);
        }
    }
    return out;
}

Layer group_layer(const IntelDataset& dataset, const std::string& group_id) {
    auto it = dataset.groups.find(group_id);
    if (it == dataset.groups.end()) {
        throw DataError("unknown group id \"" + group_id + "\"");
    }
    Layer layer;
    layer.name = it->second.name;
    for (const auto& technique_id : it->second.technique_ids) {
        layer.scores[technique_id] = 1;
    }
    return layer;
}

} // namespace isadm
