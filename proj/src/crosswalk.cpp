#include "isadm/crosswalk.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <set>

namespace isadm {

using detail::json;

const std::vector<std::string>& TacticCrosswalk::for_category(StrideCategory c) const {
    auto it = tactics.find(c);
    if (it == tactics.end()) {
        throw DataError(std::string("crosswalk has no entry for category ") +
                        std::string(stride_name(c)));
    }
    return it->second;
}

TacticCrosswalk default_crosswalk() {
    using enum StrideCategory;
    TacticCrosswalk crosswalk;
    crosswalk.tactics[Spoofing] = {"Initial Access", "Credential Access"};
    crosswalk.tactics[Tampering] = {"Execution", "Persistence", "Impact"};
    crosswalk.tactics[Repudiation] = {"Defense Evasion"};
    crosswalk.tactics[InformationDisclosure] = {"Collection", "Exfiltration"};
    crosswalk.tactics[DenialOfService] = {"Impact"};
    crosswalk.tactics[ElevationOfPrivilege] = {"Privilege Escalation"};
    return crosswalk;
}

TacticCrosswalk parse_crosswalk(std::string_view text) {
    json doc = detail::parse_json(text, "crosswalk document");
    if (!doc.is_object()) {
        throw DataError("crosswalk document: top level must be a JSON object");
    }
    TacticCrosswalk crosswalk;
    for (StrideCategory category : kStrideOrder) {
        std::string key(stride_name(category));
        auto it = doc.find(key);
        if (it == doc.end()) {
            throw DataError("crosswalk document: missing category \"" + key + "\"");
        }
        if (!it->is_array() || it->empty()) {
            throw DataError("crosswalk document: \"" + key +
                            "\" must be a nonempty array of tactic names");
        }
        std::vector<std::string> tactics;
        for (const auto& tactic : *it) {
            if (!tactic.is_string()) {
                throw DataError("crosswalk document: tactic names must be strings");
            }
            tactics.push_back(tactic.get<std::string>());
        }
        crosswalk.tactics[category] = std::move(tactics);
    }
    if (doc.size() != kStrideOrder.size()) {
        for (const auto& [key, value] : doc.items()) {
            if (!stride_from_name(key)) {
                throw DataError("crosswalk document: unknown key \"" + key + "\"");
            }
        }
    }
    return crosswalk;
}

ThresholdPolicy ThresholdPolicy::top_n(int n) {
    if (n <= 0) throw ConfigError("top-n threshold requires a positive n");
    return ThresholdPolicy{Kind::TopN, n};
}

ThresholdPolicy ThresholdPolicy::min_score(int m) {
    if (m < 0) throw ConfigError("minimum-score threshold requires a nonnegative score");
    return ThresholdPolicy{Kind::MinScore, m};
}

ThresholdPolicy ThresholdPolicy::all() { return ThresholdPolicy{Kind::All, 0}; }

ThresholdPolicy ThresholdPolicy::parse(std::string_view text) {
    std::string s = detail::trim(text);
    if (s == "all") return all();
    auto colon = s.find(':');
    if (colon != std::string::npos) {
        std::string head = s.substr(0, colon);
        std::string tail = s.substr(colon + 1);
        try {
            if (head == "min") return min_score(std::stoi(tail));
            if (head == "top") return top_n(std::stoi(tail));
        } catch (const std::exception&) {
            // fall through to the shared error below
        }
    }
    throw ConfigError("invalid threshold \"" + s + "\" (expected min:N, top:N, or all)");
}

std::string ThresholdPolicy::to_string() const {
    switch (kind) {
    case Kind::TopN: return "top:" + std::to_string(value);
    case Kind::MinScore: return "min:" + std::to_string(value);
    case Kind::All: return "all";
    }
    return "all";
}

int ImpactTable::impact_for(const std::string& technique_id) const {
    auto it = impacts.find(technique_id);
    return it == impacts.end() ? default_impact : it->second;
}

ImpactTable parse_impacts(std::string_view text) {
    json doc = detail::parse_json(text, "impact document");
    if (!doc.is_object()) {
        throw DataError("impact document: top level must be a JSON object");
    }
    detail::require_only_keys(doc, {"default", "impacts"}, "impact document");

    auto check_range = [](int value, const std::string& where) {
        if (value < 1 || value > 5) {
            throw DataError(where + ": impact " + std::to_string(value) +
                            " outside the 1..5 scale");
        }
    };

    ImpactTable table;
    if (auto it = doc.find("default"); it != doc.end()) {
        if (!it->is_number_integer()) {
            throw DataError("impact document: \"default\" must be an integer");
        }
        table.default_impact = it->get<int>();
        check_range(table.default_impact, "impact document default");
    }
    if (auto it = doc.find("impacts"); it != doc.end()) {
        if (!it->is_object()) throw DataError("impact document: \"impacts\" must be an object");
        for (const auto& [technique_id, value] : it->items()) {
            if (!is_valid_technique_id(technique_id)) {
                throw DataError("impact document: malformed technique id \"" + technique_id +
                                "\"");
            }
            if (!value.is_number_integer()) {
                throw DataError("impact document: impact for \"" + technique_id +
                                "\" must be an integer");
            }
            int impact = value.get<int>();
            check_range(impact, "impact for \"" + technique_id + "\"");
            table.impacts[technique_id] = impact;
        }
    }
    return table;
}

SubsystemThreatMap map_findings(const std::vector<ThreatFinding>& findings,
                                const TacticCrosswalk& crosswalk,
                                const std::string& subsystem_id) {
    SubsystemThreatMap tmap;
    tmap.subsystem_id = subsystem_id;
    for (const auto& finding : findings) {
        tmap.rows[{finding.element_id, finding.category}] =
            crosswalk.for_category(finding.category);
    }
    return tmap;
}

namespace {

struct Candidate {
    std::string technique_id;
    int score = 0;
};

bool candidate_order(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.technique_id < b.technique_id;
}

} // namespace

std::vector<ScoredTechnique> enumerate_techniques(const SubsystemThreatMap& tmap,
                                                  const Layer& merged,
                                                  const IntelDataset& dataset,
                                                  const ThresholdPolicy& policy,
                                                  std::vector<std::string>* warnings) {
    if (warnings) {
        for (const auto& [technique_id, score] : merged.scores) {
            if (!dataset.techniques.contains(technique_id)) {
                warnings->push_back("merged layer technique \"" + technique_id +
                                    "\" is not in the dataset");
            }
        }
    }

    // The row map iterates (element id asc, category order); tactics are kept
    // in crosswalk order, so emission order matches the documented sort.
    std::vector<ScoredTechnique> out;
    std::string current_element;
    StrideCategory current_category = StrideCategory::Spoofing;
    std::set<std::string> seen; // per (element, category) dedup

    for (const auto& [key, tactics] : tmap.rows) {
        const auto& [element_id, category] = key;
        if (element_id != current_element || category != current_category) {
            current_element = element_id;
            current_category = category;
            seen.clear();
        }
        for (const auto& tactic : tactics) {
            std::vector<Candidate> candidates;
            for (const auto& [technique_id, score] : merged.scores) {
                auto it = dataset.techniques.find(technique_id);
                if (it == dataset.techniques.end()) continue;
                if (!it->second.tactics.contains(tactic)) continue;
                candidates.push_back(Candidate{technique_id, score});
            }
            std::sort(candidates.begin(), candidates.end(), candidate_order);

            // Apply the policy per (element, category, tactic) group, then
            // drop techniques already emitted under an earlier tactic of the
            // same (element, category).
            size_t keep = candidates.size();
            if (policy.kind == ThresholdPolicy::Kind::TopN) {
                keep = std::min<size_t>(keep, static_cast<size_t>(policy.value));
            }
            for (size_t i = 0; i < keep; ++i) {
                const Candidate& candidate = candidates[i];
                if (policy.kind == ThresholdPolicy::Kind::MinScore &&
                    candidate.score < policy.value) {
                    break; // sorted by score, nothing below survives
                }
                if (!seen.insert(candidate.technique_id).second) continue;
                ScoredTechnique row;
                row.element_id = element_id;
                row.category = category;
                row.tactic = tactic;
                row.technique_id = candidate.technique_id;
                row.technique_name = dataset.techniques.at(candidate.technique_id).name;
                row.frequency = candidate.score;
                out.push_back(std::move(row));
            }
        }
    }
    return out;
}

std::vector<ScoredTechnique> composite_score(std::vector<ScoredTechnique> rows,
                                             const ImpactTable& impacts) {
    for (auto& row : rows) {
        row.impact = impacts.impact_for(row.technique_id);
        row.composite = row.frequency * *row.impact;
    }
    std::sort(rows.begin(), rows.end(), [](const ScoredTechnique& a, const ScoredTechnique& b) {
        if (*a.composite != *b.composite) return *a.composite > *b.composite;
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.technique_id < b.technique_id;
    });
    for (size_t i = 0; i < rows.size(); ++i) {
        rows[i].rank = static_cast<int>(i) + 1;
    }
    return rows;
}

std::vector<ScoredTechnique> apply_threshold(const std::vector<ScoredTechnique>& rows,
                                             const ThresholdPolicy& policy,
                                             RankKey key) {
    auto key_of = [key](const ScoredTechnique& row) {
        if (key == RankKey::Frequency) return row.frequency;
        if (!row.composite) {
            throw DataError("threshold by composite requested but composite is absent for \"" +
                            row.technique_id + "\"");
        }
        return *row.composite;
    };

    switch (policy.kind) {
    case ThresholdPolicy::Kind::All:
        for (const auto& row : rows) key_of(row); // still validate composites
        return rows;
    case ThresholdPolicy::Kind::MinScore: {
        std::vector<ScoredTechnique> out;
        for (const auto& row : rows) {
            if (key_of(row) >= policy.value) out.push_back(row);
        }
        return out;
    }
    case ThresholdPolicy::Kind::TopN: {
        std::vector<size_t> order(rows.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            int ka = key_of(rows[a]);
            int kb = key_of(rows[b]);
            if (ka != kb) return ka > kb;
            if (rows[a].frequency != rows[b].frequency) {
                return rows[a].frequency > rows[b].frequency;
            }
            return rows[a].technique_id < rows[b].technique_id;
        });
        std::set<size_t> kept(order.begin(),
                              order.begin() + std::min<size_t>(order.size(),
                                                               static_cast<size_t>(policy.value)));
        std::vector<ScoredTechnique> out;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (kept.contains(i)) out.push_back(rows[i]); // stable relative order
        }
        return out;
    }
    }
    return rows;
}

std::string band_label(int score, const FrequencyBands& bands) {
    if (score >= bands.high) return "High";
    if (score >= bands.medium) return "Medium";
    return "Low";
}

} // namespace isadm
