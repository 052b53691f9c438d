#include "isadm/stride.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>

namespace isadm {

using detail::json;

char stride_code(StrideCategory category) {
    switch (category) {
    case StrideCategory::Spoofing: return 'S';
    case StrideCategory::Tampering: return 'T';
    case StrideCategory::Repudiation: return 'R';
    case StrideCategory::InformationDisclosure: return 'I';
    case StrideCategory::DenialOfService: return 'D';
    case StrideCategory::ElevationOfPrivilege: return 'E';
    }
    return '?';
}

std::string_view stride_name(StrideCategory category) {
    switch (category) {
    case StrideCategory::Spoofing: return "Spoofing";
    case StrideCategory::Tampering: return "Tampering";
    case StrideCategory::Repudiation: return "Repudiation";
    case StrideCategory::InformationDisclosure: return "Information Disclosure";
    case StrideCategory::DenialOfService: return "Denial of Service";
    case StrideCategory::ElevationOfPrivilege: return "Elevation of Privilege";
    }
    return "";
}

std::optional<StrideCategory> stride_from_code(std::string_view code) {
    if (code.size() != 1) return std::nullopt;
    for (StrideCategory c : kStrideOrder) {
        if (stride_code(c) == code[0]) return c;
    }
    return std::nullopt;
}

std::optional<StrideCategory> stride_from_name(std::string_view name) {
    for (StrideCategory c : kStrideOrder) {
        if (stride_name(c) == name) return c;
    }
    // Accept the compact spellings used as JSON keys.
    if (name == "InformationDisclosure") return StrideCategory::InformationDisclosure;
    if (name == "DenialOfService") return StrideCategory::DenialOfService;
    if (name == "ElevationOfPrivilege") return StrideCategory::ElevationOfPrivilege;
    return std::nullopt;
}

ApplicabilityMatrix default_matrix() {
    using enum StrideCategory;
    ApplicabilityMatrix m;
    m.base[ElementKind::ExternalEntity] = {Spoofing, Repudiation};
    m.base[ElementKind::Process] = {Spoofing, Tampering, Repudiation, InformationDisclosure,
                                    DenialOfService, ElevationOfPrivilege};
    m.base[ElementKind::DataFlow] = {Tampering, InformationDisclosure, DenialOfService};
    // Repudiation included for stores by convention (logs are stores);
    // override when a model disagrees.
    m.base[ElementKind::DataStore] = {Tampering, Repudiation, InformationDisclosure,
                                      DenialOfService};
    return m;
}

namespace {

std::set<StrideCategory> parse_category_codes(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw DataError(where + ": expected an array of category codes");
    }
    std::set<StrideCategory> out;
    for (const auto& code : arr) {
        if (!code.is_string()) throw DataError(where + ": category codes must be strings");
        auto category = stride_from_code(code.get<std::string>());
        if (!category) {
            throw DataError(where + ": unknown category code \"" +
                            code.get<std::string>() + "\"");
        }
        out.insert(*category);
    }
    return out;
}

} // namespace

ApplicabilityMatrix parse_matrix(std::string_view text) {
    json doc = detail::parse_json(text, "matrix document");
    if (!doc.is_object()) {
        throw DataError("matrix document: top level must be a JSON object");
    }
    detail::require_only_keys(doc, {"base", "overrides"}, "matrix document");

    ApplicabilityMatrix matrix;
    const json& base = detail::require_key(doc, "base", "matrix document");
    for (ElementKind kind : {ElementKind::ExternalEntity, ElementKind::Process,
                             ElementKind::DataFlow, ElementKind::DataStore}) {
        std::string key(to_string(kind));
        auto it = base.find(key);
        if (it == base.end()) {
            throw DataError("matrix base: missing entry for kind \"" + key + "\"");
        }
        matrix.base[kind] = parse_category_codes(*it, "matrix base \"" + key + "\"");
    }
    detail::require_only_keys(base, {"external_entity", "process", "data_flow", "data_store"},
                              "matrix base");

    if (auto it = doc.find("overrides"); it != doc.end()) {
        if (!it->is_object()) throw DataError("matrix overrides: expected an object");
        for (const auto& [element_id, codes] : it->items()) {
            matrix.overrides[element_id] =
                parse_category_codes(codes, "matrix override \"" + element_id + "\"");
        }
    }
    return matrix;
}

std::vector<ThreatFinding> elicit_threats(const SystemModel& model,
                                          const ApplicabilityMatrix& matrix) {
    for (const auto& [element_id, categories] : matrix.overrides) {
        if (!model.find_element(element_id)) {
            throw DataError("matrix override references unknown element \"" + element_id + "\"");
        }
    }

    std::vector<ThreatFinding> findings;
    for (const auto& element : model.elements) {
        const std::set<StrideCategory>* effective = nullptr;
        if (auto it = matrix.overrides.find(element.id); it != matrix.overrides.end()) {
            effective = &it->second;
        } else if (auto base = matrix.base.find(element.kind); base != matrix.base.end()) {
            effective = &base->second;
        }
        if (!effective) continue;
        for (StrideCategory category : kStrideOrder) {
            if (effective->contains(category)) {
                findings.push_back(ThreatFinding{element.id, category});
            }
        }
    }
    std::sort(findings.begin(), findings.end(),
              [](const ThreatFinding& a, const ThreatFinding& b) {
                  if (a.element_id != b.element_id) return a.element_id < b.element_id;
                  return a.category < b.category;
              });
    return findings;
}

std::map<StrideCategory, std::vector<std::string>>
findings_by_category(const std::vector<ThreatFinding>& findings) {
    std::map<StrideCategory, std::vector<std::string>> out;
    for (StrideCategory c : kStrideOrder) out[c] = {};
    for (const auto& finding : findings) {
        out[finding.category].push_back(finding.element_id);
    }
    for (auto& [category, ids] : out) {
        std::sort(ids.begin(), ids.end());
    }
    return out;
}

} // namespace isadm
