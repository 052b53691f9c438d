#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace isadm {

struct IntelDataset;

/// A named assignment of integer scores to technique ids, the unit of
/// merging. Zero-score entries are never stored; absence means zero.
struct Layer {
    std::string name;
    std::string domain_label = "enterprise-attack";
    std::map<std::string, int> scores;

    bool operator==(const Layer&) const = default;
};

/// One row of a frequency table: a technique with its merged score, plus
/// name/tactics when a dataset could resolve them.
struct FrequencyRow {
    std::string technique_id;
    std::string technique_name; // empty when not resolvable
    std::vector<std::string> tactics;
    int score = 0;

    bool operator==(const FrequencyRow&) const = default;
};

/// Sums scores across layers; entries summing to zero are omitted. All
/// inputs must share a domain label. n-ary, so staged two-phase merging and
/// flat merging agree.
Layer merge(const std::vector<Layer>& layers, const std::string& merged_name);

/// One row per scored technique, sorted by (score descending, technique id
/// ascending). Pass a dataset to enrich rows with names and tactics.
std::vector<FrequencyRow> frequency_table(const Layer& layer,
                                          const IntelDataset* dataset = nullptr);

/// Emits the navigator-layer JSON subset with a fixed key order and
/// techniques sorted by techniqueID. Byte-identical for equal layers.
std::string export_navigator(const Layer& layer);

/// Parses a navigator layer. Entries with score 0 or no score are dropped
/// with a warning; unknown fields are ignored; a negative score is an error.
Layer import_navigator(std::string_view text,
                       std::vector<std::string>* warnings = nullptr);

} // namespace isadm
