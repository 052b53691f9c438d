#include "isadm/dfd_model.hpp"
#include "isadm/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace isadm;

namespace {

// Three-element backup grouping used across the suites.
const char* kBackupModel = R"({
  "boundaries": [{"id": "B1", "name": "Branch"}],
  "elements": [
    {"id": "P9", "kind": "process", "name": "Backup Scheduler", "boundaries": ["B1"]},
    {"id": "DS4", "kind": "data_store", "name": "Backup Volume"},
    {"id": "DF7", "kind": "data_flow", "name": "Backup Stream", "source": "P9", "sink": "DS4"}
  ],
  "subsystems": [{"id": "backup", "name": "Backups", "elements": ["DF7", "P9", "DS4"]}]
})";

} // namespace

TEST_CASE("parse_model: minimal single-process document") {
    auto model = parse_model(R"({"elements":[{"id":"P9","kind":"process","name":"Backup Proc"}]})");
    REQUIRE(model.elements.size() == 1);
    CHECK(model.elements[0].kind == ElementKind::Process);
    CHECK(model.elements[0].id == "P9");
    CHECK(model.elements[0].name == "Backup Proc");
}

TEST_CASE("parse_model: backup subsystem declares exactly its three elements") {
    auto model = parse_model(testsupport::slurp(testsupport::data_dir() / "backup/model.json"));
    const Subsystem* backup = model.find_subsystem("backup");
    REQUIRE(backup != nullptr);
    CHECK(backup->element_ids == std::set<std::string>{"DF7", "P9", "DS4"});
}

TEST_CASE("parse_model: unknown element kind is rejected by name") {
    CHECK_THROWS_WITH_AS(parse_model(R"({"elements":[{"id":"X","kind":"server","name":"n"}]})"),
                         doctest::Contains("server"), DataError);
}

TEST_CASE("parse_model: missing required field") {
    CHECK_THROWS_AS(parse_model(R"({"elements":[{"id":"X","kind":"process"}]})"), DataError);
    CHECK_THROWS_AS(parse_model(R"({"elements":[{"kind":"process","name":"n"}]})"), DataError);
    // data flows need both endpoints
    CHECK_THROWS_AS(parse_model(R"({"elements":[{"id":"F","kind":"data_flow","name":"n","source":"A"}]})"),
                    DataError);
}

TEST_CASE("parse_model: source/sink only allowed on data flows") {
    CHECK_THROWS_AS(parse_model(R"({"elements":[{"id":"P","kind":"process","name":"n","source":"A"}]})"),
                    DataError);
}

TEST_CASE("parse_model: unknown keys inside objects are errors") {
    CHECK_THROWS_AS(parse_model(R"({"elements":[{"id":"P","kind":"process","name":"n","color":"red"}]})"),
                    DataError);
    CHECK_THROWS_AS(parse_model(R"({"boundaries":[{"id":"B","name":"n","shape":"box"}]})"),
                    DataError);
}

TEST_CASE("parse_model: unknown top-level keys warn and are ignored") {
    std::vector<std::string> warnings;
    auto model = parse_model(R"({"elements":[],"diagram":"ignored"})", &warnings);
    CHECK(model.elements.empty());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("diagram") != std::string::npos);
}

TEST_CASE("parse_model: syntax errors carry a position") {
    CHECK_THROWS_WITH_AS(parse_model("{\"elements\": ["), doctest::Contains("byte"), DataError);
}

TEST_CASE("model round-trip: parse(serialize(m)) == m") {
    for (const char* fixture : {"backup/model.json", "heist/model.json", "breach/model.json"}) {
        auto model = parse_model(testsupport::slurp(testsupport::data_dir() / fixture));
        CHECK(parse_model(serialize_model(model)) == model);
    }
    auto small = parse_model(kBackupModel);
    CHECK(parse_model(serialize_model(small)) == small);
}

TEST_CASE("validate_model: valid fixture has no violations") {
    CHECK(validate_model(parse_model(kBackupModel)).empty());
    CHECK(validate_model(parse_model(testsupport::slurp(testsupport::data_dir() /
                                                        "backup/model.json")))
              .empty());
}

TEST_CASE("validate_model: dangling sink yields DANGLING_REF for the flow") {
    auto model = parse_model(R"({
      "elements": [
        {"id": "P9", "kind": "process", "name": "p"},
        {"id": "DF7", "kind": "data_flow", "name": "f", "source": "P9", "sink": "DS99"}
      ]})");
    auto violations = validate_model(model);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].code == "DANGLING_REF");
    CHECK(violations[0].offending_id == "DF7");
}

TEST_CASE("validate_model: duplicate element id") {
    auto model = parse_model(R"({"elements":[
      {"id":"P1","kind":"process","name":"a"},
      {"id":"P1","kind":"process","name":"b"}]})");
    auto violations = validate_model(model);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].code == "DUPLICATE_ID");
    CHECK(violations[0].offending_id == "P1");
}

TEST_CASE("validate_model: flow terminating on a flow, empty subsystem, unknown boundary") {
    auto model = parse_model(R"({
      "elements": [
        {"id": "P1", "kind": "process", "name": "p", "boundaries": ["B9"]},
        {"id": "F1", "kind": "data_flow", "name": "f", "source": "P1", "sink": "F2"},
        {"id": "F2", "kind": "data_flow", "name": "g", "source": "P1", "sink": "P1"}
      ],
      "subsystems": [{"id": "s", "name": "empty", "elements": []}]})");
    auto violations = validate_model(model);
    std::vector<std::string> codes;
    for (const auto& v : violations) codes.push_back(v.code);
    CHECK(codes == std::vector<std::string>{"DANGLING_REF", "EMPTY_SUBSYSTEM", "FLOW_ENDPOINT"});
}

TEST_CASE("validate_model is deterministic") {
    auto model = parse_model(R"({"elements":[
      {"id":"P1","kind":"process","name":"a"},
      {"id":"P1","kind":"process","name":"b"},
      {"id":"F","kind":"data_flow","name":"f","source":"X","sink":"Y"}]})");
    CHECK(validate_model(model) == validate_model(model));
}

TEST_CASE("subsystem_elements: lexicographic order matches the worked examples") {
    auto model = parse_model(testsupport::slurp(testsupport::data_dir() / "backup/model.json"));

    std::vector<std::string> backup_ids;
    for (const auto& e : subsystem_elements(model, "backup")) backup_ids.push_back(e.id);
    CHECK(backup_ids == std::vector<std::string>{"DF7", "DS4", "P9"});

    std::vector<std::string> atm_ids;
    for (const auto& e : subsystem_elements(model, "atm")) atm_ids.push_back(e.id);
    CHECK(atm_ids == std::vector<std::string>{"DF1", "DF2", "DF3", "EE1", "P1", "P2", "P3"});

    CHECK_THROWS_AS(subsystem_elements(model, "x"), DataError);
}

TEST_CASE("subsystem_elements output is a sorted subset of model elements") {
    auto model = parse_model(testsupport::slurp(testsupport::data_dir() / "breach/model.json"));
    for (const auto& subsystem : model.subsystems) {
        auto members = subsystem_elements(model, subsystem.id);
        for (size_t i = 0; i + 1 < members.size(); ++i) {
            CHECK(members[i].id < members[i + 1].id);
        }
        for (const auto& member : members) {
            CHECK(model.find_element(member.id) != nullptr);
        }
    }
}

TEST_CASE("model round-trip holds for randomized models") {
    std::mt19937 rng(20240811);
    for (int iteration = 0; iteration < 200; ++iteration) {
        SystemModel model;
        int boundaries = static_cast<int>(rng() % 3);
        for (int b = 0; b < boundaries; ++b) {
            model.boundaries.push_back({"B" + std::to_string(b), "boundary"});
        }
        int processes = 1 + static_cast<int>(rng() % 5);
        for (int p = 0; p < processes; ++p) {
            DfdElement e;
            e.id = "P" + std::to_string(p);
            e.kind = (p % 3 == 0) ? ElementKind::DataStore : ElementKind::Process;
            e.name = "node " + std::to_string(p);
            if (boundaries > 0 && rng() % 2) {
                e.boundary_ids.insert("B" + std::to_string(rng() % boundaries));
            }
            model.elements.push_back(e);
        }
        if (processes >= 2 && rng() % 2) {
            DfdElement f;
            f.id = "F0";
            f.kind = ElementKind::DataFlow;
            f.name = "flow";
            f.source_id = "P0";
            f.sink_id = "P1";
            model.elements.push_back(f);
        }
        if (rng() % 2) {
            Subsystem s;
            s.id = "S0";
            s.name = "subsystem";
            s.element_ids.insert("P0");
            model.subsystems.push_back(s);
        }
        model.metadata["seed"] = std::to_string(iteration);
        CHECK(parse_model(serialize_model(model)) == model);
    }
}
