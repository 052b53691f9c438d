#pragma once

#include "isadm/dfd_model.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace isadm {

/// The six STRIDE threat categories, declared in the canonical S,T,R,I,D,E
/// order used for all sorting.
enum class StrideCategory {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
};

inline constexpr std::array<StrideCategory, 6> kStrideOrder = {
    StrideCategory::Spoofing,
    StrideCategory::Tampering,
    StrideCategory::Repudiation,
    StrideCategory::InformationDisclosure,
    StrideCategory::DenialOfService,
    StrideCategory::ElevationOfPrivilege,
};

char stride_code(StrideCategory category);
std::string_view stride_name(StrideCategory category);
std::optional<StrideCategory> stride_from_code(std::string_view code);
std::optional<StrideCategory> stride_from_name(std::string_view name);

/// Which STRIDE categories apply to which elements. The base map covers all
/// four element kinds; per-element overrides replace the base set entirely.
struct ApplicabilityMatrix {
    std::map<ElementKind, std::set<StrideCategory>> base;
    std::map<std::string, std::set<StrideCategory>> overrides;
};

/// Canonical per-kind convention: external entities {S,R}, processes all
/// six, data flows {T,I,D}, data stores {T,R,I,D}. No overrides.
ApplicabilityMatrix default_matrix();

/// Matrix file format: {"base":{"process":["S",...],...},
/// "overrides":{"DS4":["S","D","E"],...}} with one-letter category codes.
ApplicabilityMatrix parse_matrix(std::string_view text);

/// One elicited threat: this category applies to this element.
struct ThreatFinding {
    std::string element_id;
    StrideCategory category;

    bool operator==(const ThreatFinding&) const = default;
};

/// Applies the matrix to every element of the model. Requires a valid model
/// and override ids that exist in it. Output is sorted by (element id,
/// category order S,T,R,I,D,E).
std::vector<ThreatFinding> elicit_threats(const SystemModel& model,
                                          const ApplicabilityMatrix& matrix);

/// Partitions findings into per-category element-id lists (ids sorted
/// lexicographically). All six categories are present as keys.
std::map<StrideCategory, std::vector<std::string>>
findings_by_category(const std::vector<ThreatFinding>& findings);

} // namespace isadm
