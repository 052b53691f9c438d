// isadm: STRIDE + adversary-intelligence threat modeling pipeline.
//
// Subcommands:
//   validate  check a system model's referential integrity
//   groups    keyword-search threat groups in a dataset
//   merge     build and merge unit layers into a navigator layer
//   analyze   run the full pipeline from a run configuration
//   fetch     download a raw dataset bundle (refused when ISADM_OFFLINE=1)

#include "isadm/crosswalk.hpp"
#include "isadm/dfd_model.hpp"
#include "isadm/errors.hpp"
#include "isadm/fetch.hpp"
#include "isadm/intel.hpp"
#include "isadm/layer.hpp"
#include "isadm/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw isadm::IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream stream(value);
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_validate(const std::string& model_path) {
    auto model = isadm::parse_model(read_file_or_throw(model_path));
    auto violations = isadm::validate_model(model);
    if (violations.empty()) {
        std::cout << "OK: " << model.elements.size() << " elements, "
                  << model.boundaries.size() << " boundaries, "
                  << model.subsystems.size() << " subsystems\n";
        return 0;
    }
    for (const auto& v : violations) {
        std::cout << v.code << "\t" << v.offending_id << "\t" << v.message << "\n";
    }
    std::cerr << "model is invalid: " << violations.size() << " violation(s)\n";
    return 2;
}

int cmd_groups(const std::string& dataset_path, const std::string& keywords_csv,
               const std::string& allow_list_path) {
    auto dataset = isadm::load_dataset(read_file_or_throw(dataset_path));
    auto hits = isadm::search_groups(dataset, split_csv(keywords_csv));
    if (!allow_list_path.empty()) {
        hits = isadm::apply_allow_list(hits,
                                       isadm::parse_allow_list(read_file_or_throw(allow_list_path)));
    }
    for (const auto& hit : hits) {
        std::cout << hit.group_id << "\t" << dataset.groups.at(hit.group_id).name << "\t";
        bool first = true;
        for (const auto& keyword : hit.matched_keywords) {
            if (!first) std::cout << ",";
            first = false;
            std::cout << keyword;
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_merge(const std::string& dataset_path, const std::string& groups_csv,
              const std::string& keywords_csv, const std::string& allow_list_path,
              const std::string& out_path) {
    auto dataset = isadm::load_dataset(read_file_or_throw(dataset_path));

    std::vector<std::string> group_ids;
    if (!groups_csv.empty()) {
        group_ids = split_csv(groups_csv);
    } else if (!keywords_csv.empty()) {
        auto hits = isadm::search_groups(dataset, split_csv(keywords_csv));
        if (!allow_list_path.empty()) {
            hits = isadm::apply_allow_list(
                hits, isadm::parse_allow_list(read_file_or_throw(allow_list_path)));
        }
        for (const auto& hit : hits) group_ids.push_back(hit.group_id);
    } else {
        throw isadm::ConfigError("merge requires --groups or --keywords");
    }
    if (group_ids.empty()) {
        throw isadm::DataError("no threat groups selected");
    }

    std::vector<isadm::Layer> layers;
    for (const auto& group_id : group_ids) {
        layers.push_back(isadm::group_layer(dataset, group_id));
    }
    auto merged = isadm::merge(layers, "merged");

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw isadm::IoError("cannot open file for writing: " + out_path);
    out << isadm::export_navigator(merged);
    std::cout << "merged " << layers.size() << " layers, " << merged.scores.size()
              << " techniques -> " << out_path << "\n";
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& subsystem,
                const std::string& threshold, const std::string& rank_by,
                int global_top, const std::string& out_dir) {
    auto config = isadm::load_run_config(config_path);
    if (!subsystem.empty()) config.subsystem_filter = subsystem;
    if (!threshold.empty()) config.threshold = isadm::ThresholdPolicy::parse(threshold);
    if (!rank_by.empty()) {
        if (rank_by == "freq") config.rank_by = isadm::RankKey::Frequency;
        else if (rank_by == "composite") config.rank_by = isadm::RankKey::Composite;
        else throw isadm::ConfigError("invalid --rank-by \"" + rank_by + "\"");
    }
    if (global_top > 0) config.global_top = global_top;
    if (!out_dir.empty()) config.output_dir = fs::path(out_dir);
    if (!config.output_dir) {
        throw isadm::ConfigError("analyze requires --out or an output_dir in the configuration");
    }

    auto report = isadm::run_pipeline(config);
    isadm::write_outputs(report, config);

    std::cout << "analyzed " << report.subsystems.size() << " subsystem(s), "
              << report.ranking.size() << " prioritized technique(s) -> "
              << config.output_dir->string() << "\n";
    for (const auto& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    return 0;
}

int cmd_fetch(const std::string& url, const std::string& out_path) {
    std::size_t bytes = isadm::fetch_dataset(url, out_path);
    std::cout << "fetched " << bytes << " bytes -> " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"STRIDE-to-countermeasure threat modeling pipeline"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Validate a system model document");
    std::string model_path;
    validate->add_option("--model", model_path, "Model document (JSON)")->required();

    auto* groups = app.add_subcommand("groups", "Search threat groups by keyword");
    std::string dataset_path, keywords_csv, allow_list_path;
    groups->add_option("--dataset", dataset_path, "Dataset document (JSON)")->required();
    groups->add_option("--keywords", keywords_csv, "Comma-separated keywords")->required();
    groups->add_option("--allow-list", allow_list_path, "Allow-list document (JSON)");

    auto* merge = app.add_subcommand("merge", "Merge per-group unit layers");
    std::string merge_dataset, merge_groups, merge_keywords, merge_allow, merge_out;
    merge->add_option("--dataset", merge_dataset, "Dataset document (JSON)")->required();
    merge->add_option("--groups", merge_groups, "Comma-separated group ids");
    merge->add_option("--keywords", merge_keywords, "Comma-separated keywords");
    merge->add_option("--allow-list", merge_allow, "Allow-list document (JSON)");
    merge->add_option("--out", merge_out, "Output navigator layer path")->required();

    auto* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline");
    std::string config_path, subsystem, threshold, rank_by, out_dir;
    int global_top = 0;
    analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
    analyze->add_option("--subsystem", subsystem, "Restrict to one subsystem id");
    analyze->add_option("--threshold", threshold, "min:N | top:N | all");
    analyze->add_option("--rank-by", rank_by, "freq | composite");
    analyze->add_option("--global-top", global_top,
                        "Keep only the N best-ranked techniques across all subsystems");
    analyze->add_option("--out", out_dir, "Output directory");

    auto* fetch = app.add_subcommand("fetch", "Download a raw dataset bundle");
    std::string url, fetch_out;
    fetch->add_option("--url", url, "Source url")->required();
    fetch->add_option("--out", fetch_out, "Destination file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(model_path);
        if (app.got_subcommand(groups)) return cmd_groups(dataset_path, keywords_csv,
                                                          allow_list_path);
        if (app.got_subcommand(merge)) return cmd_merge(merge_dataset, merge_groups,
                                                        merge_keywords, merge_allow, merge_out);
        if (app.got_subcommand(analyze)) return cmd_analyze(config_path, subsystem, threshold,
                                                            rank_by, global_top, out_dir);
        if (app.got_subcommand(fetch)) return cmd_fetch(url, fetch_out);
    } catch (const isadm::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const isadm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const isadm::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const isadm::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
