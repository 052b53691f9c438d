#pragma once

#include "isadm/intel.hpp"
#include "isadm/layer.hpp"
#include "isadm/stride.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace isadm {

/// STRIDE category -> ordered list of tactic names. All six categories are
/// always present with at least one tactic each.
struct TacticCrosswalk {
    std::map<StrideCategory, std::vector<std::string>> tactics;

    const std::vector<std::string>& for_category(StrideCategory c) const;
};

/// The default bridge between the asset-centric and adversary-centric views:
///   Spoofing -> Initial Access, Credential Access
///   Tampering -> Execution, Persistence, Impact
///   Repudiation -> Defense Evasion
///   Information Disclosure -> Collection, Exfiltration
///   Denial of Service -> Impact
///   Elevation of Privilege -> Privilege Escalation
TacticCrosswalk default_crosswalk();

/// Crosswalk file: {"Spoofing":["Initial Access",...], ...}; all six keys
/// required, each with a nonempty tactic list.
TacticCrosswalk parse_crosswalk(std::string_view text);

/// Which scored techniques proceed to mitigation.
struct ThresholdPolicy {
    enum class Kind { TopN, MinScore, All };

    Kind kind = Kind::All;
    int value = 0;

    static ThresholdPolicy top_n(int n);
    static ThresholdPolicy min_score(int m);
    static ThresholdPolicy all();

    /// Accepts "min:5", "top:10", or "all".
    static ThresholdPolicy parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const ThresholdPolicy&) const = default;
};

/// Per-technique impact weights on a 1..5 scale; absent ids fall back to
/// default_impact. The default of 1 makes composite scoring a no-op unless
/// the operator supplies impacts.
struct ImpactTable {
    int default_impact = 1;
    std::map<std::string, int> impacts;

    int impact_for(const std::string& technique_id) const;
};

/// Impact file: {"default":1, "impacts":{"T1204.002":5, ...}}.
ImpactTable parse_impacts(std::string_view text);

/// One enumerated technique for one (element, category, tactic) slot.
struct ScoredTechnique {
    std::string element_id;
    StrideCategory category = StrideCategory::Spoofing;
    std::string tactic;
    std::string technique_id;
    std::string technique_name;
    int frequency = 0;
    std::optional<int> impact;
    std::optional<int> composite; // frequency * impact, exact
    std::optional<int> rank;

    bool operator==(const ScoredTechnique&) const = default;
};

/// A subsystem's findings expanded to tactics: (element, category) ->
/// tactic names in crosswalk order.
struct SubsystemThreatMap {
    std::string subsystem_id;
    std::map<std::pair<std::string, StrideCategory>, std::vector<std::string>> rows;
};

/// Expands each finding to its crosswalk tactics, preserving crosswalk
/// order. Findings must belong to the named subsystem's elements.
SubsystemThreatMap map_findings(const std::vector<ThreatFinding>& findings,
                                const TacticCrosswalk& crosswalk,
                                const std::string& subsystem_id);

/// For every (element, category, tactic) row: all merged-layer techniques
/// carrying that tactic whose score satisfies the policy, with frequency
/// taken from the merged layer. TopN selects per (element, category, tactic)
/// group. A technique qualifying under several tactics of one (element,
/// category) appears once, under the first tactic in crosswalk order.
/// Output order: element id, category (S,T,R,I,D,E), tactic (crosswalk
/// order), score descending, technique id ascending.
std::vector<ScoredTechnique> enumerate_techniques(const SubsystemThreatMap& tmap,
                                                  const Layer& merged,
                                                  const IntelDataset& dataset,
                                                  const ThresholdPolicy& policy,
                                                  std::vector<std::string>* warnings = nullptr);

/// Fills impact and composite (= frequency x impact) for every row, then
/// orders by (composite desc, frequency desc, id asc) and assigns positional
/// ranks 1..k.
std::vector<ScoredTechnique> composite_score(std::vector<ScoredTechnique> rows,
                                             const ImpactTable& impacts);

enum class RankKey { Frequency, Composite };

/// Keeps rows satisfying the policy by the given key, preserving relative
/// order. Requires composite to be present on all rows when keyed on it.
std::vector<ScoredTechnique> apply_threshold(const std::vector<ScoredTechnique>& rows,
                                             const ThresholdPolicy& policy,
                                             RankKey key);

/// Qualitative bands over integer frequency scores, used only for report
/// labels: High >= high, Medium >= medium, else Low.
struct FrequencyBands {
    int high = 10;
    int medium = 5;

    bool operator==(const FrequencyBands&) const = default;
};

std::string band_label(int score, const FrequencyBands& bands);

} // namespace isadm
