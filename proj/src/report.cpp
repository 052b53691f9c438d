#include "isadm/report.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

namespace isadm {

using detail::json;
namespace fs = std::filesystem;

namespace {

// Rethrows module errors with the pipeline stage and offending file path
// prepended, preserving the error class (and therefore the exit code).
template <typename F>
auto run_stage(const std::string& stage, const fs::path& path, F&& fn) {
    auto prefix = [&](const char* what) {
        std::string where = "[stage " + stage + "]";
        if (!path.empty()) where += " " + path.string();
        return where + ": " + what;
    };
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix(e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError(prefix(e.what()));
    } catch (const IoError& e) {
        throw IoError(prefix(e.what()));
    } catch (const DataError& e) {
        throw DataError(prefix(e.what()));
    }
}

fs::path resolve_relative(const fs::path& base_dir, const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p : base_dir / p;
}

RankKey parse_rank_key(const std::string& value) {
    if (value == "freq") return RankKey::Frequency;
    if (value == "composite") return RankKey::Composite;
    throw ConfigError("invalid rank key \"" + value + "\" (expected freq or composite)");
}

} // namespace

std::string RunConfig::digest() const {
    json doc;
    doc["model"] = model.string();
    doc["matrix"] = matrix.string();
    doc["dataset"] = dataset.string();
    doc["crosswalk"] = crosswalk.string();
    doc["allow_list"] = allow_list ? allow_list->string() : "";
    doc["impacts"] = impacts ? impacts->string() : "";
    doc["d3fend_catalog"] = d3fend_catalog ? d3fend_catalog->string() : "";
    doc["d3fend_mapping"] = d3fend_mapping ? d3fend_mapping->string() : "";
    doc["keywords"] = keywords;
    doc["groups"] = groups;
    doc["threshold"] = threshold.to_string();
    doc["rank_by"] = rank_by == RankKey::Frequency ? "freq" : "composite";
    doc["formats"] = std::vector<std::string>(formats.begin(), formats.end());
    doc["bands"] = {{"high", bands.high}, {"medium", bands.medium}};
    doc["subsystem"] = subsystem_filter.value_or("");
    doc["global_top"] = global_top.value_or(0);
    return detail::fnv1a64_hex(doc.dump());
}

RunConfig load_run_config(const fs::path& config_path) {
    std::string text = detail::read_file(config_path);
    json doc = detail::parse_json(text, "run configuration");
    if (!doc.is_object()) {
        throw ConfigError("run configuration: top level must be a JSON object");
    }
    detail::require_only_keys(doc,
                              {"model", "matrix", "dataset", "crosswalk", "allow_list",
                               "impacts", "d3fend_catalog", "d3fend_mapping", "keywords",
                               "groups", "threshold", "rank_by", "output_dir", "formats",
                               "bands"},
                              "run configuration");

    fs::path base_dir = config_path.parent_path();
    RunConfig config;
    config.model = resolve_relative(base_dir, detail::require_string(doc, "model",
                                                                     "run configuration"));
    config.matrix = resolve_relative(base_dir, detail::require_string(doc, "matrix",
                                                                      "run configuration"));
    config.dataset = resolve_relative(base_dir, detail::require_string(doc, "dataset",
                                                                       "run configuration"));
    config.crosswalk = resolve_relative(base_dir, detail::require_string(doc, "crosswalk",
                                                                         "run configuration"));
    auto optional_path = [&](const char* key) -> std::optional<fs::path> {
        auto it = doc.find(key);
        if (it == doc.end()) return std::nullopt;
        if (!it->is_string()) {
            throw ConfigError(std::string("run configuration: \"") + key +
                              "\" must be a string");
        }
        return resolve_relative(base_dir, it->get<std::string>());
    };
    config.allow_list = optional_path("allow_list");
    config.impacts = optional_path("impacts");
    config.d3fend_catalog = optional_path("d3fend_catalog");
    config.d3fend_mapping = optional_path("d3fend_mapping");
    if (config.d3fend_catalog.has_value() != config.d3fend_mapping.has_value()) {
        throw ConfigError("run configuration: d3fend_catalog and d3fend_mapping "
                          "must be given together");
    }

    auto string_list = [&](const char* key) {
        std::vector<std::string> out;
        auto it = doc.find(key);
        if (it == doc.end()) return out;
        if (!it->is_array()) {
            throw ConfigError(std::string("run configuration: \"") + key +
                              "\" must be an array of strings");
        }
        for (const auto& v : *it) {
            if (!v.is_string()) {
                throw ConfigError(std::string("run configuration: \"") + key +
                                  "\" must be an array of strings");
            }
            out.push_back(v.get<std::string>());
        }
        return out;
    };
    config.keywords = string_list("keywords");
    config.groups = string_list("groups");
    if (config.keywords.empty() && config.groups.empty()) {
        throw ConfigError("run configuration: give keywords or an explicit group list");
    }
    if (!config.keywords.empty() && !config.groups.empty()) {
        throw ConfigError("run configuration: keywords and groups are mutually exclusive");
    }

    if (auto it = doc.find("threshold"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("run configuration: \"threshold\" must be a string");
        config.threshold = ThresholdPolicy::parse(it->get<std::string>());
    }
    if (auto it = doc.find("rank_by"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("run configuration: \"rank_by\" must be a string");
        config.rank_by = parse_rank_key(it->get<std::string>());
    }
    if (auto it = doc.find("output_dir"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("run configuration: \"output_dir\" must be a string");
        config.output_dir = resolve_relative(base_dir, it->get<std::string>());
    }

    for (const auto& format : string_list("formats")) {
        if (format != "markdown" && format != "json" && format != "navigator") {
            throw ConfigError("run configuration: unknown output format \"" + format + "\"");
        }
        config.formats.insert(format);
    }
    if (config.formats.empty()) {
        config.formats = {"markdown", "json", "navigator"};
    }

    if (auto it = doc.find("bands"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("run configuration: \"bands\" must be an object");
        detail::require_only_keys(*it, {"high", "medium"}, "run configuration bands");
        if (auto h = it->find("high"); h != it->end()) config.bands.high = h->get<int>();
        if (auto m = it->find("medium"); m != it->end()) config.bands.medium = m->get<int>();
        if (config.bands.medium > config.bands.high) {
            throw ConfigError("run configuration: band boundary medium must not exceed high");
        }
    }

    // All referenced inputs must exist before the run starts.
    std::vector<fs::path> required = {config.model, config.matrix, config.dataset,
                                      config.crosswalk};
    for (const auto& optional : {config.allow_list, config.impacts, config.d3fend_catalog,
                                 config.d3fend_mapping}) {
        if (optional) required.push_back(*optional);
    }
    for (const auto& path : required) {
        if (!fs::exists(path)) {
            throw ConfigError("run configuration references missing file: " + path.string());
        }
    }
    return config;
}

namespace {

void annotate_composites(std::vector<ScoredTechnique>& rows, const ImpactTable& impacts) {
    for (auto& row : rows) {
        row.impact = impacts.impact_for(row.technique_id);
        row.composite = row.frequency * *row.impact;
    }
}

} // namespace

AnalysisReport run_pipeline(const RunConfig& config) {
    AnalysisReport report;
    report.bands = config.bands;
    report.config_digest = config.digest();
    report.generated_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();

    SystemModel model = run_stage("load-model", config.model, [&] {
        return parse_model(detail::read_file(config.model), &report.warnings);
    });
    run_stage("validate-model", config.model, [&] {
        auto violations = validate_model(model);
        if (!violations.empty()) {
            std::string message = "model is invalid:";
            for (const auto& v : violations) {
                message += "\n  " + v.code + " " + v.offending_id + ": " + v.message;
            }
            throw ValidationError(message);
        }
        return 0;
    });

    ApplicabilityMatrix matrix = run_stage("load-matrix", config.matrix, [&] {
        return parse_matrix(detail::read_file(config.matrix));
    });
    std::vector<ThreatFinding> findings = run_stage("elicit", config.model, [&] {
        return elicit_threats(model, matrix);
    });

    IntelDataset dataset = run_stage("load-dataset", config.dataset, [&] {
        return load_dataset(detail::read_file(config.dataset));
    });
    report.dataset_version = dataset.version_label;

    run_stage("select-groups", config.dataset, [&] {
        if (!config.keywords.empty()) {
            auto hits = search_groups(dataset, config.keywords);
            if (config.allow_list) {
                auto include = parse_allow_list(detail::read_file(*config.allow_list));
                hits = apply_allow_list(hits, include);
            }
            for (const auto& hit : hits) {
                report.selected_groups.push_back(GroupSelection{
                    hit.group_id, dataset.groups.at(hit.group_id).name,
                    {hit.matched_keywords.begin(), hit.matched_keywords.end()}});
            }
        } else {
            for (const auto& group_id : config.groups) {
                if (!dataset.groups.contains(group_id)) {
                    throw DataError("unknown group id \"" + group_id + "\"");
                }
                report.selected_groups.push_back(
                    GroupSelection{group_id, dataset.groups.at(group_id).name, {}});
            }
        }
        if (report.selected_groups.empty()) {
            throw DataError("no threat groups selected");
        }
        return 0;
    });

    std::vector<Layer> unit_layers = run_stage("build-layers", config.dataset, [&] {
        std::vector<Layer> layers;
        layers.reserve(report.selected_groups.size());
        for (const auto& selection : report.selected_groups) {
            layers.push_back(group_layer(dataset, selection.id));
        }
        return layers;
    });
    report.merged = run_stage("merge", fs::path(), [&] { return merge(unit_layers, "merged"); });
    report.frequency = frequency_table(report.merged, &dataset);

    TacticCrosswalk crosswalk = run_stage("load-crosswalk", config.crosswalk, [&] {
        return parse_crosswalk(detail::read_file(config.crosswalk));
    });

    ImpactTable impacts;
    if (config.impacts) {
        impacts = run_stage("load-impacts", *config.impacts, [&] {
            return parse_impacts(detail::read_file(*config.impacts));
        });
    }
    report.has_impacts = config.impacts.has_value() || config.rank_by == RankKey::Composite;

    // Steps 4-7 repeat per subsystem; sections are emitted in subsystem-id
    // order regardless of model order.
    std::vector<const Subsystem*> subsystems;
    for (const auto& subsystem : model.subsystems) subsystems.push_back(&subsystem);
    std::sort(subsystems.begin(), subsystems.end(),
              [](const Subsystem* a, const Subsystem* b) { return a->id < b->id; });
    if (config.subsystem_filter) {
        if (!model.find_subsystem(*config.subsystem_filter)) {
            throw ConfigError("[stage map-subsystems] unknown subsystem \"" +
                              *config.subsystem_filter + "\"");
        }
        std::erase_if(subsystems, [&](const Subsystem* s) {
            return s->id != *config.subsystem_filter;
        });
    }

    for (const Subsystem* subsystem : subsystems) {
        SubsystemReport section;
        section.subsystem_id = subsystem->id;
        section.subsystem_name = subsystem->name;

        std::vector<ThreatFinding> local;
        for (const auto& finding : findings) {
            if (subsystem->element_ids.contains(finding.element_id)) {
                local.push_back(finding);
            }
        }
        section.threat_map = run_stage("map-subsystems", fs::path(), [&] {
            return map_findings(local, crosswalk, subsystem->id);
        });
        section.techniques = run_stage("enumerate", fs::path(), [&] {
            return enumerate_techniques(section.threat_map, report.merged, dataset,
                                        config.threshold, &report.warnings);
        });
        if (report.has_impacts) {
            annotate_composites(section.techniques, impacts);
        }
        report.subsystems.push_back(std::move(section));
    }

    // Global ranking across subsystems: one row per distinct technique.
    std::vector<ScoredTechnique> distinct;
    std::set<std::string> seen;
    for (const auto& section : report.subsystems) {
        for (const auto& row : section.techniques) {
            if (!seen.insert(row.technique_id).second) continue;
            ScoredTechnique entry;
            entry.technique_id = row.technique_id;
            entry.technique_name = row.technique_name;
            entry.frequency = row.frequency;
            distinct.push_back(std::move(entry));
        }
    }
    if (config.rank_by == RankKey::Composite || report.has_impacts) {
        report.ranking = run_stage("composite", fs::path(), [&] {
            return composite_score(std::move(distinct), impacts);
        });
    } else {
        std::sort(distinct.begin(), distinct.end(),
                  [](const ScoredTechnique& a, const ScoredTechnique& b) {
                      if (a.frequency != b.frequency) return a.frequency > b.frequency;
                      return a.technique_id < b.technique_id;
                  });
        for (size_t i = 0; i < distinct.size(); ++i) {
            distinct[i].rank = static_cast<int>(i) + 1;
        }
        report.ranking = std::move(distinct);
    }
    if (config.global_top) {
        report.ranking = apply_threshold(report.ranking,
                                         ThresholdPolicy::top_n(*config.global_top),
                                         config.rank_by);
    }

    if (config.d3fend_catalog && config.d3fend_mapping) {
        CountermeasureDb db = run_stage("load-countermeasures", *config.d3fend_catalog, [&] {
            return load_countermeasures(detail::read_file(*config.d3fend_catalog),
                                        detail::read_file(*config.d3fend_mapping));
        });
        report.mitigation = mitigation_matrix(report.ranking, db);
        report.has_countermeasures = true;
    }
    return report;
}

namespace {

json scored_technique_json(const ScoredTechnique& row, const FrequencyBands& bands,
                           bool global_row) {
    json obj;
    if (!global_row) {
        obj["element"] = row.element_id;
        obj["category"] = std::string(stride_name(row.category));
        obj["tactic"] = row.tactic;
    }
    obj["technique_id"] = row.technique_id;
    obj["technique_name"] = row.technique_name;
    obj["frequency"] = row.frequency;
    obj["band"] = band_label(row.frequency, bands);
    if (row.impact) obj["impact"] = *row.impact;
    if (row.composite) obj["composite"] = *row.composite;
    if (row.rank) obj["rank"] = *row.rank;
    return obj;
}

std::string markdown_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else out += c;
    }
    return out;
}

} // namespace

std::string render_json(const AnalysisReport& report) {
    json doc;
    doc["dataset_version"] = report.dataset_version;
    doc["config_digest"] = report.config_digest;
    doc["generated_at_ms"] = report.generated_at_ms;
    doc["bands"] = {{"high", report.bands.high}, {"medium", report.bands.medium}};

    doc["selected_groups"] = json::array();
    for (const auto& group : report.selected_groups) {
        doc["selected_groups"].push_back({{"id", group.id},
                                          {"name", group.name},
                                          {"matched_keywords", group.matched_keywords}});
    }

    doc["merged_layer"] = {{"name", report.merged.name},
                           {"domain", report.merged.domain_label},
                           {"scores", report.merged.scores}};

    doc["frequency_table"] = json::array();
    for (const auto& row : report.frequency) {
        doc["frequency_table"].push_back({{"technique_id", row.technique_id},
                                          {"technique_name", row.technique_name},
                                          {"tactics", row.tactics},
                                          {"score", row.score}});
    }

    doc["subsystems"] = json::array();
    for (const auto& section : report.subsystems) {
        json sub;
        sub["id"] = section.subsystem_id;
        sub["name"] = section.subsystem_name;
        sub["threat_map"] = json::array();
        for (const auto& [key, tactics] : section.threat_map.rows) {
            sub["threat_map"].push_back({{"element", key.first},
                                         {"category", std::string(stride_name(key.second))},
                                         {"tactics", tactics}});
        }
        sub["techniques"] = json::array();
        for (const auto& row : section.techniques) {
            sub["techniques"].push_back(scored_technique_json(row, report.bands, false));
        }
        doc["subsystems"].push_back(std::move(sub));
    }

    doc["ranking"] = json::array();
    for (const auto& row : report.ranking) {
        doc["ranking"].push_back(scored_technique_json(row, report.bands, true));
    }

    doc["mitigation_matrix"] = json::array();
    for (const auto& row : report.mitigation) {
        json entry;
        entry["technique_id"] = row.technique_id;
        entry["technique_name"] = row.technique_name;
        entry["uncovered"] = row.uncovered;
        json grouped;
        for (const auto& [category, refs] : row.countermeasures) {
            json list = json::array();
            for (const auto& ref : refs) {
                json cm = {{"id", ref.technique.id},
                           {"name", ref.technique.name},
                           {"relation", ref.relation}};
                if (!ref.artifact.empty()) cm["artifact"] = ref.artifact;
                list.push_back(std::move(cm));
            }
            grouped[std::string(to_string(category))] = std::move(list);
        }
        entry["countermeasures"] = std::move(grouped);
        doc["mitigation_matrix"].push_back(std::move(entry));
    }

    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

std::string render_markdown(const AnalysisReport& report) {
    std::ostringstream out;
    out << "# Threat model report\n\n";
    out << "- Dataset version: " << report.dataset_version << "\n";
    out << "- Configuration digest: `" << report.config_digest << "`\n";
    out << "- Generated at (unix ms): " << report.generated_at_ms << "\n";
    out << "- Frequency bands: High >= " << report.bands.high << ", Medium >= "
        << report.bands.medium << "\n\n";

    out << "## Selected threat groups\n\n";
    if (report.selected_groups.empty()) {
        out << "none\n\n";
    } else {
        out << "| Group | Name | Matched keywords |\n|---|---|---|\n";
        for (const auto& group : report.selected_groups) {
            out << "| " << markdown_escape(group.id) << " | " << markdown_escape(group.name)
                << " | ";
            for (size_t i = 0; i < group.matched_keywords.size(); ++i) {
                if (i) out << ", ";
                out << markdown_escape(group.matched_keywords[i]);
            }
            out << " |\n";
        }
        out << "\n";
    }

    out << "## Technique frequency\n\n";
    if (report.frequency.empty()) {
        out << "none\n\n";
    } else {
        out << "| Technique | Name | Tactics | Score |\n|---|---|---|---|\n";
        for (const auto& row : report.frequency) {
            out << "| " << row.technique_id << " | " << markdown_escape(row.technique_name)
                << " | ";
            for (size_t i = 0; i < row.tactics.size(); ++i) {
                if (i) out << "; ";
                out << markdown_escape(row.tactics[i]);
            }
            out << " | " << row.score << " |\n";
        }
        out << "\n";
    }

    for (const auto& section : report.subsystems) {
        out << "## Subsystem: " << markdown_escape(section.subsystem_id);
        if (!section.subsystem_name.empty()) {
            out << " (" << markdown_escape(section.subsystem_name) << ")";
        }
        out << "\n\n### Threat map\n\n";
        if (section.threat_map.rows.empty()) {
            out << "none\n\n";
        } else {
            out << "| Element | STRIDE | Tactics |\n|---|---|---|\n";
            for (const auto& [key, tactics] : section.threat_map.rows) {
                out << "| " << markdown_escape(key.first) << " | " << stride_name(key.second)
                    << " | ";
                for (size_t i = 0; i < tactics.size(); ++i) {
                    if (i) out << "; ";
                    out << markdown_escape(tactics[i]);
                }
                out << " |\n";
            }
            out << "\n";
        }

        out << "### Enumerated techniques\n\n";
        if (section.techniques.empty()) {
            out << "none\n\n";
        } else {
            bool with_composite = section.techniques.front().composite.has_value();
            out << "| Element | STRIDE | Tactic | Technique | Name | Score |";
            if (with_composite) out << " Impact | Composite |";
            out << "\n|---|---|---|---|---|---|";
            if (with_composite) out << "---|---|";
            out << "\n";
            for (const auto& row : section.techniques) {
                out << "| " << markdown_escape(row.element_id) << " | "
                    << stride_name(row.category) << " | " << markdown_escape(row.tactic)
                    << " | " << row.technique_id << " | " << markdown_escape(row.technique_name)
                    << " | " << row.frequency << " |";
                if (with_composite) {
                    out << " " << row.impact.value_or(0) << " | " << row.composite.value_or(0)
                        << " |";
                }
                out << "\n";
            }
            out << "\n";
        }
    }
    if (report.subsystems.empty()) {
        out << "## Subsystems\n\nnone\n\n";
    }

    out << "## Prioritized techniques\n\n";
    if (report.ranking.empty()) {
        out << "none\n\n";
    } else {
        bool with_composite = report.ranking.front().composite.has_value();
        out << "| Rank | Technique | Name | Frequency | Band |";
        if (with_composite) out << " Impact | Composite |";
        out << "\n|---|---|---|---|---|";
        if (with_composite) out << "---|---|";
        out << "\n";
        for (const auto& row : report.ranking) {
            out << "| " << row.rank.value_or(0) << " | " << row.technique_id << " | "
                << markdown_escape(row.technique_name) << " | " << row.frequency << " | "
                << band_label(row.frequency, report.bands) << " |";
            if (with_composite) {
                out << " " << row.impact.value_or(0) << " | " << row.composite.value_or(0)
                    << " |";
            }
            out << "\n";
        }
        out << "\n";
    }

    out << "## Countermeasures\n\n";
    if (!report.has_countermeasures) {
        out << "not requested\n\n";
    } else if (report.mitigation.empty()) {
        out << "none\n\n";
    } else {
        out << "| Technique | Name | Defensive techniques | Coverage |\n|---|---|---|---|\n";
        for (const auto& row : report.mitigation) {
            out << "| " << row.technique_id << " | " << markdown_escape(row.technique_name)
                << " | ";
            bool first = true;
            for (DefensiveCategory category : kDefensiveOrder) {
                const auto& refs = row.countermeasures.at(category);
                if (refs.empty()) continue;
                if (!first) out << "; ";
                first = false;
                out << to_string(category) << ": ";
                for (size_t i = 0; i < refs.size(); ++i) {
                    if (i) out << ", ";
                    out << markdown_escape(refs[i].technique.name) << " ("
                        << refs[i].technique.id << ")";
                }
            }
            if (first) out << "-";
            out << " | " << (row.uncovered ? "uncovered" : "mapped") << " |\n";
        }
        out << "\n";
    }

    out << "## Warnings\n\n";
    if (report.warnings.empty()) {
        out << "none\n";
    } else {
        for (const auto& warning : report.warnings) {
            out << "- " << warning << "\n";
        }
    }
    return out.str();
}

namespace {

// Exclusive lock file: created on entry, removed on scope exit. A second
// writer against the same directory fails instead of interleaving output.
class LockFile {
public:
    explicit LockFile(const fs::path& path) : path_(path) {
        std::FILE* f = std::fopen(path.string().c_str(), "wx");
        if (!f) {
            throw IoError("output directory is locked by another run: " + path.string());
        }
        std::fclose(f);
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    fs::path path_;
};

} // namespace

void write_outputs(const AnalysisReport& report, const RunConfig& config) {
    if (!config.output_dir) {
        throw ConfigError("no output directory configured");
    }
    const fs::path& dir = *config.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }

    LockFile lock(dir / ".isadm.lock");
    if (config.formats.contains("markdown")) {
        detail::write_file(dir / "report.md", render_markdown(report));
    }
    if (config.formats.contains("json")) {
        detail::write_file(dir / "report.json", render_json(report));
    }
    if (config.formats.contains("navigator")) {
        detail::write_file(dir / "merged_layer.navigator.json", export_navigator(report.merged));
    }
}

} // namespace isadm
