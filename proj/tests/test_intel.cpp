#include "isadm/errors.hpp"
#include "isadm/intel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace isadm;

namespace {

const char* kMiniDataset = R"({
  "version_label": "test",
  "techniques": [
    {"id": "T1105", "name": "Ingress Tool Transfer", "tactics": ["Command and Control"]},
    {"id": "T1566.001", "name": "Spearphishing Attachment", "tactics": ["Initial Access"]},
    {"id": "T1110", "name": "Brute Force", "tactics": ["Credential Access"]}
  ],
  "groups": [
    {"id": "g1", "name": "Alpha", "aliases": [], "description": "targets banks",
     "techniques": ["T1105", "T1566.001"]},
    {"id": "g2", "name": "Beta", "aliases": ["B2"], "description": "broad campaigns",
     "techniques": ["T1110"]}
  ]
})";

IntelDataset bank_dataset() {
    return load_dataset(testsupport::slurp(testsupport::data_dir() / "backup/dataset.json"));
}

std::set<std::string> hit_ids(const std::vector<KeywordHit>& hits) {
    std::set<std::string> out;
    for (const auto& hit : hits) out.insert(hit.group_id);
    return out;
}

} // namespace

TEST_CASE("load_dataset: minimal consistent document") {
    auto dataset = load_dataset(kMiniDataset);
    CHECK(dataset.groups.size() == 2);
    CHECK(dataset.techniques.size() == 3);
    CHECK(dataset.version_label == "test");
}

TEST_CASE("load_dataset: dangling technique reference names group and technique") {
    const char* doc = R"({
      "version_label": "t",
      "techniques": [{"id": "T1105", "name": "n", "tactics": ["Execution"]}],
      "groups": [{"id": "g1", "name": "G", "techniques": ["T9999"]}]
    })";
    CHECK_THROWS_WITH_AS(load_dataset(doc), doctest::Contains("T9999"), DataError);
    CHECK_THROWS_WITH_AS(load_dataset(doc), doctest::Contains("g1"), DataError);
}

TEST_CASE("load_dataset: the financial-sector fixture carries sixteen groups") {
    CHECK(bank_dataset().groups.size() == 16);
}

TEST_CASE("load_dataset: duplicate ids and malformed ids fail atomically") {
    CHECK_THROWS_AS(load_dataset(R"({"version_label":"t",
      "techniques":[{"id":"T1105","name":"a","tactics":["E"]},
                    {"id":"T1105","name":"b","tactics":["E"]}],
      "groups":[]})"),
                    DataError);
    CHECK_THROWS_AS(load_dataset(R"({"version_label":"t",
      "techniques":[{"id":"1105","name":"a","tactics":["E"]}],"groups":[]})"),
                    DataError);
    CHECK_THROWS_AS(load_dataset(R"({"version_label":"t",
      "techniques":[{"id":"T1105","name":"a","tactics":[]}],"groups":[]})"),
                    DataError);
    CHECK_THROWS_AS(load_dataset(R"({"version_label":"t","techniques":[],
      "groups":[{"id":"g","name":"a"},{"id":"g","name":"b"}]})"),
                    DataError);
}

TEST_CASE("technique id pattern") {
    CHECK(is_valid_technique_id("T1566"));
    CHECK(is_valid_technique_id("T1566.001"));
    CHECK_FALSE(is_valid_technique_id("T156"));
    CHECK_FALSE(is_valid_technique_id("T15666"));
    CHECK_FALSE(is_valid_technique_id("T1566.01"));
    CHECK_FALSE(is_valid_technique_id("X1566"));
    CHECK_FALSE(is_valid_technique_id("T1566.001.002"));

    auto dataset = load_dataset(kMiniDataset);
    CHECK(dataset.techniques.at("T1566.001").is_subtechnique());
    CHECK_FALSE(dataset.techniques.at("T1105").is_subtechnique());
}

TEST_CASE("search_groups: the financial column of the group table") {
    auto hits = search_groups(bank_dataset(), {"financial"});
    auto ids = hit_ids(hits);
    CHECK(ids.contains("oilrig"));
    CHECK(ids.contains("apt41"));
    CHECK(ids.contains("carbanak"));
    CHECK_FALSE(ids.contains("gcman"));       // bank only
    CHECK_FALSE(ids.contains("rtm"));          // bank/banking only
    CHECK(ids.size() == 13);
}

TEST_CASE("search_groups: no match yields empty, search is case-insensitive") {
    auto dataset = load_dataset(kMiniDataset);
    CHECK(search_groups(dataset, {"fintech"}).empty());
    CHECK(hit_ids(search_groups(dataset, {"BANKS"})) == std::set<std::string>{"g1"});
    CHECK(hit_ids(search_groups(dataset, {"b2"})) == std::set<std::string>{"g2"}); // alias
}

TEST_CASE("search_groups: results sorted by group name, keywords preserved") {
    auto hits = search_groups(bank_dataset(), {"bank", "financial"});
    REQUIRE(hits.size() == 16);
    for (size_t i = 0; i + 1 < hits.size(); ++i) {
        const auto& dataset = bank_dataset();
        CHECK(dataset.groups.at(hits[i].group_id).name <=
              dataset.groups.at(hits[i + 1].group_id).name);
    }
    for (const auto& hit : hits) {
        for (const auto& keyword : hit.matched_keywords) {
            CHECK((keyword == "bank" || keyword == "financial"));
        }
        CHECK_FALSE(hit.matched_keywords.empty());
    }
}

TEST_CASE("search_groups: empty or blank keywords are usage errors") {
    auto dataset = load_dataset(kMiniDataset);
    CHECK_THROWS_AS(search_groups(dataset, {}), ConfigError);
    CHECK_THROWS_AS(search_groups(dataset, {"  "}), ConfigError);
}

TEST_CASE("search_groups: monotone in the keyword set; union behaves like one query") {
    auto dataset = bank_dataset();
    std::vector<std::string> pool = {"bank", "banking", "financial", "chinese", "russian"};
    std::mt19937 rng(99);
    for (int iteration = 0; iteration < 50; ++iteration) {
        std::vector<std::string> a, b;
        for (const auto& keyword : pool) {
            if (rng() % 2) a.push_back(keyword);
        }
        if (a.empty()) a.push_back("bank");
        b = a;
        b.push_back(pool[rng() % pool.size()]);

        auto hits_a = hit_ids(search_groups(dataset, a));
        auto hits_b = hit_ids(search_groups(dataset, b));
        for (const auto& id : hits_a) CHECK(hits_b.contains(id));
    }

    auto joint = hit_ids(search_groups(dataset, {"bank", "financial"}));
    auto bank_only = hit_ids(search_groups(dataset, {"bank"}));
    auto fin_only = hit_ids(search_groups(dataset, {"financial"}));
    std::set<std::string> united = bank_only;
    united.insert(fin_only.begin(), fin_only.end());
    CHECK(joint == united);
}

TEST_CASE("allow-list filters search hits") {
    auto include = parse_allow_list(R"({"include_groups":["oilrig","carbanak"]})");
    auto hits = apply_allow_list(search_groups(bank_dataset(), {"financial"}), include);
    CHECK(hit_ids(hits) == std::set<std::string>{"oilrig", "carbanak"});

    CHECK_THROWS_AS(parse_allow_list(R"({"groups":[]})"), DataError);
}

TEST_CASE("group_layer: unit scores over exactly the group's techniques") {
    auto dataset = load_dataset(kMiniDataset);
    auto layer = group_layer(dataset, "g1");
    CHECK(layer.scores == std::map<std::string, int>{{"T1105", 1}, {"T1566.001", 1}});

    // group with no techniques
    auto empty_group = load_dataset(R"({"version_label":"t","techniques":[],
                                        "groups":[{"id":"g","name":"G"}]})");
    CHECK(group_layer(empty_group, "g").scores.empty());

    CHECK_THROWS_AS(group_layer(dataset, "nope"), DataError);
}

TEST_CASE("group_layer: key set equals the group technique set on the fixture") {
    auto dataset = bank_dataset();
    for (const auto& [group_id, group] : dataset.groups) {
        auto layer = group_layer(dataset, group_id);
        std::set<std::string> keys;
        for (const auto& [technique_id, score] : layer.scores) {
            CHECK(score == 1);
            keys.insert(technique_id);
        }
        CHECK(keys == group.technique_ids);
    }
}

TEST_CASE("dataset serialize/load round-trip") {
    for (const char* fixture : {"backup/dataset.json", "heist/dataset.json",
                                "breach/dataset.json"}) {
        auto dataset = load_dataset(testsupport::slurp(testsupport::data_dir() / fixture));
        CHECK(load_dataset(serialize_dataset(dataset)) == dataset);
    }

    std::mt19937 rng(5);
    for (int iteration = 0; iteration < 50; ++iteration) {
        auto dataset = testsupport::random_dataset(rng, 6, 20);
        CHECK(load_dataset(serialize_dataset(dataset)) == dataset);
    }
}
