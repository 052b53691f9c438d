#pragma once

#include "isadm/crosswalk.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isadm {

/// The six defensive stages, in the fixed harden-to-restore reporting order.
enum class DefensiveCategory {
    Harden,
    Detect,
    Isolate,
    Deceive,
    Evict,
    Restore,
};

inline constexpr std::array<DefensiveCategory, 6> kDefensiveOrder = {
    DefensiveCategory::Harden,  DefensiveCategory::Detect,
    DefensiveCategory::Isolate, DefensiveCategory::Deceive,
    DefensiveCategory::Evict,   DefensiveCategory::Restore,
};

std::string_view to_string(DefensiveCategory category);
std::optional<DefensiveCategory> defensive_category_from(std::string_view name);

/// "may-harden", "may-detect", ... The relation label on a mapping edge must
/// agree with the defensive technique's category.
std::string relation_for(DefensiveCategory category);

struct DefensiveTechnique {
    std::string id; // "D3-" + letters
    std::string name;
    DefensiveCategory category = DefensiveCategory::Detect;

    bool operator==(const DefensiveTechnique&) const = default;
};

/// One edge from an attack technique to a defensive technique, optionally
/// annotated with the digital artifact that links them.
struct CountermeasureEdge {
    std::string defensive_id;
    std::string relation;
    std::string artifact; // optional, empty when absent

    bool operator==(const CountermeasureEdge&) const = default;
};

/// Validated catalog + mapping pair: the flat form of the knowledge graph.
struct CountermeasureDb {
    std::map<std::string, DefensiveTechnique> catalog;
    std::map<std::string, std::vector<CountermeasureEdge>> mappings; // by attack technique id
};

/// Loads and cross-validates both documents; fails atomically on a dangling
/// defensive id, a relation/category mismatch, or a malformed id.
CountermeasureDb load_countermeasures(std::string_view catalog_text,
                                      std::string_view mapping_text);

struct CountermeasureRef {
    DefensiveTechnique technique;
    std::string relation;
    std::string artifact;

    bool operator==(const CountermeasureRef&) const = default;
};

/// Entries for one attack technique grouped by defensive category (fixed
/// Harden..Restore order, defensive id order within a category). Unknown
/// technique ids yield six empty lists, never an error.
std::map<DefensiveCategory, std::vector<CountermeasureRef>>
countermeasures_for(const CountermeasureDb& db, const std::string& technique_id);

/// One row of the mitigation matrix: a prioritized technique with its
/// grouped countermeasures. uncovered is set when the mapping has nothing
/// for it, so gaps surface for analyst review instead of dropping out.
struct MitigationRow {
    std::string technique_id;
    std::string technique_name;
    std::map<DefensiveCategory, std::vector<CountermeasureRef>> countermeasures;
    bool uncovered = false;
};

/// One row per distinct technique, in the priority order of the input rows.
std::vector<MitigationRow> mitigation_matrix(const std::vector<ScoredTechnique>& prioritized,
                                             const CountermeasureDb& db);

} // namespace isadm
