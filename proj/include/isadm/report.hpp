#pragma once

#include "isadm/crosswalk.hpp"
#include "isadm/d3fend.hpp"
#include "isadm/dfd_model.hpp"
#include "isadm/intel.hpp"
#include "isadm/layer.hpp"
#include "isadm/stride.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace isadm {

/// Everything one analysis run needs, loaded from a run-configuration file.
/// Path values in the file are resolved relative to the file's directory.
struct RunConfig {
    std::filesystem::path model;
    std::filesystem::path matrix;
    std::filesystem::path dataset;
    std::filesystem::path crosswalk;
    std::optional<std::filesystem::path> allow_list;
    std::optional<std::filesystem::path> impacts;
    std::optional<std::filesystem::path> d3fend_catalog;
    std::optional<std::filesystem::path> d3fend_mapping;
    std::vector<std::string> keywords; // empty -> use explicit groups
    std::vector<std::string> groups;
    ThresholdPolicy threshold = ThresholdPolicy::all();
    RankKey rank_by = RankKey::Frequency;
    std::optional<std::filesystem::path> output_dir;
    std::set<std::string> formats; // subset of {markdown, json, navigator}
    FrequencyBands bands;
    std::optional<std::string> subsystem_filter; // CLI --subsystem
    // Top-N thresholding applies per (element, category, tactic) group; this
    // optional cut additionally keeps only the n best-ranked techniques
    // globally, across all subsystems (CLI --global-top).
    std::optional<int> global_top;

    /// Stable digest of the canonicalized configuration contents, so
    /// identical inputs yield identical digests.
    std::string digest() const;
};

RunConfig load_run_config(const std::filesystem::path& config_path);

struct GroupSelection {
    std::string id;
    std::string name;
    std::vector<std::string> matched_keywords;
};

struct SubsystemReport {
    std::string subsystem_id;
    std::string subsystem_name;
    SubsystemThreatMap threat_map;
    std::vector<ScoredTechnique> techniques;
};

/// The full result of a pipeline run. Deterministic for identical inputs
/// except for generated_at_ms.
struct AnalysisReport {
    std::string dataset_version;
    std::string config_digest;
    std::int64_t generated_at_ms = 0;
    FrequencyBands bands;
    bool has_impacts = false;
    bool has_countermeasures = false;

    std::vector<GroupSelection> selected_groups;
    Layer merged;
    std::vector<FrequencyRow> frequency;
    std::vector<SubsystemReport> subsystems;
    std::vector<ScoredTechnique> ranking; // distinct techniques, priority order
    std::vector<MitigationRow> mitigation;
    std::vector<std::string> warnings;
};

/// Runs the whole pipeline: load and validate the model, elicit threats,
/// select groups, build and merge unit layers, enumerate and threshold per
/// subsystem, optionally weight by impact, and map countermeasures. Module
/// errors are rethrown with the pipeline stage and file path prepended.
AnalysisReport run_pipeline(const RunConfig& config);

/// Markdown rendering with stable ordering; empty sections render a "none"
/// placeholder. Byte-identical for equal reports.
std::string render_markdown(const AnalysisReport& report);

/// Canonical JSON rendering: sorted keys, integer scores, byte-identical
/// for equal reports.
std::string render_json(const AnalysisReport& report);

/// Writes report.md / report.json / merged_layer.navigator.json into the
/// output directory per the selected formats. Takes an exclusive lock file
/// in the directory for the duration of the write.
void write_outputs(const AnalysisReport& report, const RunConfig& config);

} // namespace isadm
