#include "isadm/d3fend.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <cctype>

namespace isadm {

using detail::json;

std::string_view to_string(DefensiveCategory category) {
    switch (category) {
    case DefensiveCategory::Harden: return "Harden";
    case DefensiveCategory::Detect: return "Detect";
    case DefensiveCategory::Isolate: return "Isolate";
    case DefensiveCategory::Deceive: return "Deceive";
    case DefensiveCategory::Evict: return "Evict";
    case DefensiveCategory::Restore: return "Restore";
    }
    return "";
}

std::optional<DefensiveCategory> defensive_category_from(std::string_view name) {
    for (DefensiveCategory c : kDefensiveOrder) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::string relation_for(DefensiveCategory category) {
    return "may-" + detail::to_lower(to_string(category));
}

namespace {

bool is_valid_defensive_id(std::string_view id) {
    if (id.size() < 4 || id.substr(0, 3) != "D3-") return false;
    return std::all_of(id.begin() + 3, id.end(), [](unsigned char c) {
        return std::isalpha(c) != 0;
    });
}

} // namespace

CountermeasureDb load_countermeasures(std::string_view catalog_text,
                                      std::string_view mapping_text) {
    CountermeasureDb db;

    json catalog_doc = detail::parse_json(catalog_text, "countermeasure catalog");
    if (!catalog_doc.is_object()) {
        throw DataError("countermeasure catalog: top level must be a JSON object");
    }
    detail::require_only_keys(catalog_doc, {"defensive_techniques"}, "countermeasure catalog");
    const json& techniques =
        detail::require_key(catalog_doc, "defensive_techniques", "countermeasure catalog");
    if (!techniques.is_array()) {
        throw DataError("countermeasure catalog: \"defensive_techniques\" must be an array");
    }
    for (const auto& obj : techniques) {
        detail::require_only_keys(obj, {"id", "name", "category"}, "defensive technique");
        DefensiveTechnique technique;
        technique.id = detail::require_string(obj, "id", "defensive technique");
        const std::string where = "defensive technique \"" + technique.id + "\"";
        if (!is_valid_defensive_id(technique.id)) {
            throw DataError(where + ": malformed id (expected D3- followed by letters)");
        }
        technique.name = detail::require_string(obj, "name", where);
        std::string category = detail::require_string(obj, "category", where);
        auto parsed = defensive_category_from(category);
        if (!parsed) {
            throw DataError(where + ": unknown defensive category \"" + category + "\"");
        }
        technique.category = *parsed;
        if (!db.catalog.emplace(technique.id, technique).second) {
            throw DataError("countermeasure catalog: duplicate id \"" + technique.id + "\"");
        }
    }

    json mapping_doc = detail::parse_json(mapping_text, "countermeasure mapping");
    if (!mapping_doc.is_object()) {
        throw DataError("countermeasure mapping: top level must be a JSON object");
    }
    detail::require_only_keys(mapping_doc, {"mappings"}, "countermeasure mapping");
    const json& mappings = detail::require_key(mapping_doc, "mappings", "countermeasure mapping");
    if (!mappings.is_object()) {
        throw DataError("countermeasure mapping: \"mappings\" must be an object");
    }
    for (const auto& [attack_id, edges] : mappings.items()) {
        if (!is_valid_technique_id(attack_id)) {
            throw DataError("countermeasure mapping: malformed attack technique id \"" +
                            attack_id + "\"");
        }
        if (!edges.is_array()) {
            throw DataError("countermeasure mapping: entries for \"" + attack_id +
                            "\" must be an array");
        }
        std::vector<CountermeasureEdge> parsed_edges;
        for (const auto& obj : edges) {
            detail::require_only_keys(obj, {"d3fend", "relation", "artifact"},
                                      "mapping entry for \"" + attack_id + "\"");
            CountermeasureEdge edge;
            edge.defensive_id = detail::require_string(obj, "d3fend",
                                                       "mapping entry for \"" + attack_id + "\"");
            edge.relation = detail::require_string(obj, "relation",
                                                   "mapping entry for \"" + attack_id + "\"");
            if (auto it = obj.find("artifact"); it != obj.end()) {
                if (!it->is_string()) {
                    throw DataError("mapping entry for \"" + attack_id +
                                    "\": \"artifact\" must be a string");
                }
                edge.artifact = it->get<std::string>();
            }

            auto catalog_it = db.catalog.find(edge.defensive_id);
            if (catalog_it == db.catalog.end()) {
                throw DataError("countermeasure mapping: \"" + attack_id +
                                "\" references unknown defensive id \"" + edge.defensive_id +
                                "\"");
            }
            std::string expected = relation_for(catalog_it->second.category);
            if (edge.relation != expected) {
                throw DataError("countermeasure mapping: \"" + attack_id + "\" -> \"" +
                                edge.defensive_id + "\" has relation \"" + edge.relation +
                                "\" but the technique's category requires \"" + expected + "\"");
            }
            parsed_edges.push_back(std::move(edge));
        }
        db.mappings[attack_id] = std::move(parsed_edges);
    }
    return db;
}

std::map<DefensiveCategory, std::vector<CountermeasureRef>>
countermeasures_for(const CountermeasureDb& db, const std::string& technique_id) {
    std::map<DefensiveCategory, std::vector<CountermeasureRef>> out;
    for (DefensiveCategory c : kDefensiveOrder) out[c] = {};

    auto it = db.mappings.find(technique_id);
    if (it == db.mappings.end()) return out;

    for (const auto& edge : it->second) {
        const DefensiveTechnique& technique = db.catalog.at(edge.defensive_id);
        out[technique.category].push_back(CountermeasureRef{technique, edge.relation,
                                                            edge.artifact});
    }
    for (auto& [category, refs] : out) {
        std::sort(refs.begin(), refs.end(), [](const CountermeasureRef& a,
                                               const CountermeasureRef& b) {
            return a.technique.id < b.technique.id;
        });
    }
    return out;
}

std::vector<MitigationRow> mitigation_matrix(const std::vector<ScoredTechnique>& prioritized,
                                             const CountermeasureDb& db) {
    std::vector<MitigationRow> out;
    std::set<std::string> seen;
    for (const auto& row : prioritized) {
        if (!seen.insert(row.technique_id).second) continue;
        MitigationRow entry;
        entry.technique_id = row.technique_id;
        entry.technique_name = row.technique_name;
        entry.countermeasures = countermeasures_for(db, row.technique_id);
        auto it = db.mappings.find(row.technique_id);
        entry.uncovered = it == db.mappings.end() || it->second.empty();
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace isadm
