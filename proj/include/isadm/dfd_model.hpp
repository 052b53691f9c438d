#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace isadm {

/// The four element kinds of a data-flow diagram. Parsing any other kind
/// string is an error.
enum class ElementKind {
    ExternalEntity,
    Process,
    DataFlow,
    DataStore,
};

std::string_view to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from(std::string_view name);

/// One DFD element. Data flows carry source/sink references to other
/// elements; the other kinds have neither.
struct DfdElement {
    std::string id;
    ElementKind kind = ElementKind::Process;
    std::string name;
    std::set<std::string> boundary_ids;
    std::string source_id; // data_flow only
    std::string sink_id;   // data_flow only

    bool operator==(const DfdElement&) const = default;
};

struct TrustBoundary {
    std::string id;
    std::string name;

    bool operator==(const TrustBoundary&) const = default;
};

/// A named grouping of elements analyzed as one unit (a "targeted asset").
struct Subsystem {
    std::string id;
    std::string name;
    std::set<std::string> element_ids;

    bool operator==(const Subsystem&) const = default;
};

/// Declarative system model: elements, trust boundaries, and subsystem
/// groupings. Immutable after parse; all queries are pure.
struct SystemModel {
    std::vector<DfdElement> elements;
    std::vector<TrustBoundary> boundaries;
    std::vector<Subsystem> subsystems;
    std::map<std::string, std::string> metadata;

    const DfdElement* find_element(const std::string& id) const;
    const Subsystem* find_subsystem(const std::string& id) const;

    bool operator==(const SystemModel&) const = default;
};

/// One referential-integrity violation. Codes are stable, machine readable:
/// DUPLICATE_ID, DANGLING_REF, EMPTY_ID, EMPTY_SUBSYSTEM, FLOW_ENDPOINT.
struct Violation {
    std::string code;
    std::string offending_id;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Parses a model document (JSON). Populates all fields but performs no
/// referential validation; use validate_model for that. Unknown top-level
/// keys are ignored with a warning; unknown keys inside objects are errors.
SystemModel parse_model(std::string_view text,
                        std::vector<std::string>* warnings = nullptr);

/// Serializes back to the model document format. parse(serialize(m)) == m.
std::string serialize_model(const SystemModel& model);

/// Returns all invariant violations, sorted by (code, offending id).
/// Empty result means the model is valid.
std::vector<Violation> validate_model(const SystemModel& model);

/// Elements of a subsystem in lexicographic id order. Throws DataError for
/// an unknown subsystem id.
std::vector<DfdElement> subsystem_elements(const SystemModel& model,
                                           const std::string& subsystem_id);

} // namespace isadm
