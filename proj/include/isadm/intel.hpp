#pragma once

#include "isadm/layer.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace isadm {

/// True for ids of the form T#### or T####.### (sub-technique).
bool is_valid_technique_id(std::string_view id);

struct Technique {
    std::string id;
    std::string name;
    std::set<std::string> tactics; // tactic display names, never empty

    bool is_subtechnique() const { return id.find('.') != std::string::npos; }
    bool operator==(const Technique&) const = default;
};

struct ThreatGroup {
    std::string id;
    std::string name;
    std::set<std::string> aliases;
    std::string description;
    std::set<std::string> technique_ids;

    bool operator==(const ThreatGroup&) const = default;
};

/// A flat threat-intelligence dataset: techniques plus the groups observed
/// using them. Immutable after load; all queries are pure.
struct IntelDataset {
    std::string version_label;
    std::map<std::string, Technique> techniques;
    std::map<std::string, ThreatGroup> groups;

    bool operator==(const IntelDataset&) const = default;
};

/// A group matched by keyword search, with the keywords that hit it.
struct KeywordHit {
    std::string group_id;
    std::set<std::string> matched_keywords;

    bool operator==(const KeywordHit&) const = default;
};

/// Parses and fully validates a dataset document. Fails atomically on any
/// schema or integrity violation (duplicate ids, dangling technique refs).
IntelDataset load_dataset(std::string_view text);

/// Inverse of load_dataset: load(serialize(d)) == d.
std::string serialize_dataset(const IntelDataset& dataset);

/// Case-insensitive substring search over group name, aliases, and
/// description. Each matching group is listed once with every keyword that
/// matched it; results are sorted by group name. Keywords are trimmed and
/// must be nonempty.
std::vector<KeywordHit> search_groups(const IntelDataset& dataset,
                                      const std::vector<std::string>& keywords);

/// Allow-list file: {"include_groups":[...]}. Applied to search hits after
/// the fact; selection order is preserved.
std::vector<std::string> parse_allow_list(std::string_view text);
std::vector<KeywordHit> apply_allow_list(const std::vector<KeywordHit>& hits,
                                         const std::vector<std::string>& include_groups);

/// Unit-score layer for one group: score 1 for each of its techniques.
Layer group_layer(const IntelDataset& dataset, const std::string& group_id);

} // namespace isadm
