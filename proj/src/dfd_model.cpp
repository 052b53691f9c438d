#include "isadm/dfd_model.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace isadm {

using detail::json;

std::string_view to_string(ElementKind kind) {
    switch (kind) {
    case ElementKind::ExternalEntity: return "external_entity";
    case ElementKind::Process: return "process";
    case ElementKind::DataFlow: return "data_flow";
    case ElementKind::DataStore: return "data_store";
    }
    return "";
}

std::optional<ElementKind> element_kind_from(std::string_view name) {
    if (name == "external_entity") return ElementKind::ExternalEntity;
    if (name == "process") return ElementKind::Process;
    if (name == "data_flow") return ElementKind::DataFlow;
    if (name == "data_store") return ElementKind::DataStore;
    return std::nullopt;
}

const DfdElement* SystemModel::find_element(const std::string& id) const {
    for (const auto& e : elements) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

const Subsystem* SystemModel::find_subsystem(const std::string& id) const {
    for (const auto& s : subsystems) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

namespace {

DfdElement parse_element(const json& obj) {
    detail::require_only_keys(obj, {"id", "kind", "name", "boundaries", "source", "sink"},
                              "element");
    DfdElement element;
    element.id = detail::require_string(obj, "id", "element");
    const std::string where = "element \"" + element.id + "\"";

    std::string kind = detail::require_string(obj, "kind", where);
    auto parsed_kind = element_kind_from(kind);
    if (!parsed_kind) {
        throw DataError(where + ": unknown kind \"" + kind + "\"");
    }
    element.kind = *parsed_kind;
    element.name = detail::require_string(obj, "name", where);

    if (auto it = obj.find("boundaries"); it != obj.end()) {
        if (!it->is_array()) throw DataError(where + ": \"boundaries\" must be an array");
        for (const auto& b : *it) {
            if (!b.is_string()) throw DataError(where + ": boundary ids must be strings");
            element.boundary_ids.insert(b.get<std::string>());
        }
    }

    bool has_source = obj.contains("source");
    bool has_sink = obj.contains("sink");
    if (element.kind == ElementKind::DataFlow) {
        element.source_id = detail::require_string(obj, "source", where);
        element.sink_id = detail::require_string(obj, "sink", where);
    } else if (has_source || has_sink) {
        throw DataError(where + ": unknown key \"" +
                        std::string(has_source ? "source" : "sink") +
                        "\" (only data_flow elements carry source/sink)");
    }
    return element;
}

} // namespace

SystemModel parse_model(std::string_view text, std::vector<std::string>* warnings) {
    json doc = detail::parse_json(text, "model document");
    if (!doc.is_object()) {
        throw DataError("model document: top level must be a JSON object");
    }

    static const std::unordered_set<std::string> known_keys = {
        "metadata", "boundaries", "elements", "subsystems"};
    for (const auto& [key, value] : doc.items()) {
        if (!known_keys.contains(key) && warnings) {
            warnings->push_back("model document: ignoring unknown top-level key \"" + key + "\"");
        }
    }

    SystemModel model;
    if (auto it = doc.find("metadata"); it != doc.end()) {
        if (!it->is_object()) throw DataError("model document: \"metadata\" must be an object");
        for (const auto& [key, value] : it->items()) {
            if (!value.is_string()) {
                throw DataError("model metadata: value for \"" + key + "\" must be a string");
            }
            model.metadata[key] = value.get<std::string>();
        }
    }
    if (auto it = doc.find("boundaries"); it != doc.end()) {
        if (!it->is_array()) throw DataError("model document: \"boundaries\" must be an array");
        for (const auto& obj : *it) {
            detail::require_only_keys(obj, {"id", "name"}, "boundary");
            TrustBoundary boundary;
            boundary.id = detail::require_string(obj, "id", "boundary");
            boundary.name = detail::require_string(obj, "name", "boundary \"" + boundary.id + "\"");
            model.boundaries.push_back(std::move(boundary));
        }
    }
    if (auto it = doc.find("elements"); it != doc.end()) {
        if (!it->is_array()) throw DataError("model document: \"elements\" must be an array");
        for (const auto& obj : *it) {
            model.elements.push_back(parse_element(obj));
        }
    }
    if (auto it = doc.find("subsystems"); it != doc.end()) {
        if (!it->is_array()) throw DataError("model document: \"subsystems\" must be an array");
        for (const auto& obj : *it) {
            detail::require_only_keys(obj, {"id", "name", "elements"}, "subsystem");
            Subsystem subsystem;
            subsystem.id = detail::require_string(obj, "id", "subsystem");
            const std::string where = "subsystem \"" + subsystem.id + "\"";
            subsystem.name = detail::require_string(obj, "name", where);
            const json& members = detail::require_key(obj, "elements", where);
            if (!members.is_array()) throw DataError(where + ": \"elements\" must be an array");
            for (const auto& m : members) {
                if (!m.is_string()) throw DataError(where + ": element ids must be strings");
                subsystem.element_ids.insert(m.get<std::string>());
            }
            model.subsystems.push_back(std::move(subsystem));
        }
    }
    return model;
}

std::string serialize_model(const SystemModel& model) {
    nlohmann::ordered_json doc;
    doc["metadata"] = json::object();
    for (const auto& [key, value] : model.metadata) doc["metadata"][key] = value;
    doc["boundaries"] = json::array();
    for (const auto& b : model.boundaries) {
        doc["boundaries"].push_back({{"id", b.id}, {"name", b.name}});
    }
    doc["elements"] = json::array();
    for (const auto& e : model.elements) {
        nlohmann::ordered_json obj;
        obj["id"] = e.id;
        obj["kind"] = std::string(to_string(e.kind));
        obj["name"] = e.name;
        if (!e.boundary_ids.empty()) {
            obj["boundaries"] = std::vector<std::string>(e.boundary_ids.begin(),
                                                         e.boundary_ids.end());
        }
        if (e.kind == ElementKind::DataFlow) {
            obj["source"] = e.source_id;
            obj["sink"] = e.sink_id;
        }
        doc["elements"].push_back(std::move(obj));
    }
    doc["subsystems"] = json::array();
    for (const auto& s : model.subsystems) {
        nlohmann::ordered_json obj;
        obj["id"] = s.id;
        obj["name"] = s.name;
        obj["elements"] = std::vector<std::string>(s.element_ids.begin(), s.element_ids.end());
        doc["subsystems"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

std::vector<Violation> validate_model(const SystemModel& model) {
    std::vector<Violation> out;
    auto add = [&out](const char* code, const std::string& id, std::string message) {
        out.push_back(Violation{code, id, std::move(message)});
    };

    std::unordered_map<std::string, const DfdElement*> by_id;
    std::unordered_set<std::string> seen_elements;
    for (const auto& e : model.elements) {
        if (e.id.empty()) add("EMPTY_ID", e.id, "element with empty id");
        if (!seen_elements.insert(e.id).second) {
            add("DUPLICATE_ID", e.id, "duplicate element id \"" + e.id + "\"");
        } else {
            by_id[e.id] = &e;
        }
    }
    std::unordered_set<std::string> boundary_ids;
    for (const auto& b : model.boundaries) {
        if (b.id.empty()) add("EMPTY_ID", b.id, "boundary with empty id");
        if (!boundary_ids.insert(b.id).second) {
            add("DUPLICATE_ID", b.id, "duplicate boundary id \"" + b.id + "\"");
        }
    }
    std::unordered_set<std::string> subsystem_ids;
    for (const auto& s : model.subsystems) {
        if (s.id.empty()) add("EMPTY_ID", s.id, "subsystem with empty id");
        if (!subsystem_ids.insert(s.id).second) {
            add("DUPLICATE_ID", s.id, "duplicate subsystem id \"" + s.id + "\"");
        }
        if (s.element_ids.empty()) {
            add("EMPTY_SUBSYSTEM", s.id, "subsystem \"" + s.id + "\" has no elements");
        }
        for (const auto& member : s.element_ids) {
            if (!by_id.contains(member)) {
                add("DANGLING_REF", s.id,
                    "subsystem \"" + s.id + "\" references unknown element \"" + member + "\"");
            }
        }
    }
    for (const auto& e : model.elements) {
        for (const auto& b : e.boundary_ids) {
            if (!boundary_ids.contains(b)) {
                add("DANGLING_REF", e.id,
                    "element \"" + e.id + "\" references unknown boundary \"" + b + "\"");
            }
        }
        if (e.kind != ElementKind::DataFlow) continue;
        for (const std::string& endpoint : {e.source_id, e.sink_id}) {
            auto it = by_id.find(endpoint);
            if (it == by_id.end()) {
                add("DANGLING_REF", e.id,
                    "data flow \"" + e.id + "\" references unknown element \"" + endpoint + "\"");
            } else if (it->second->kind == ElementKind::DataFlow) {
                add("FLOW_ENDPOINT", e.id,
                    "data flow \"" + e.id + "\" terminates on another data flow \"" +
                        endpoint + "\"");
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.code != b.code) return a.code < b.code;
        if (a.offending_id != b.offending_id) return a.offending_id < b.offending_id;
        return a.message < b.message;
    });
    return out;
}

std::vector<DfdElement> subsystem_elements(const SystemModel& model,
                                           const std::string& subsystem_id) {
    const Subsystem* subsystem = model.find_subsystem(subsystem_id);
    if (!subsystem) {
        throw DataError("unknown subsystem id \"" + subsystem_id + "\"");
    }
    std::vector<DfdElement> out;
    for (const auto& id : subsystem->element_ids) { // std::set: already id-sorted
        if (const DfdElement* e = model.find_element(id)) {
            out.push_back(*e);
        }
    }
    return out;
}

} // namespace isadm
