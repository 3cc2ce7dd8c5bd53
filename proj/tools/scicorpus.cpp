#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scicorpus/http_client.hpp"
#include "scicorpus/pipeline.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    int partition = -1;
    std::size_t parallelism = 1;
    bool force = false;
    std::optional<std::uint64_t> seed;
    std::string structurer_url;
    std::string langid_model;
    std::optional<std::uint32_t> max_retries;
    std::optional<double> rate_limit_per_host;
    std::optional<std::uint32_t> timeout_secs;
};

scicorpus::PipelineConfig load_config(const GlobalOpts& opts) {
    if (opts.config_path.empty()) throw scicorpus::ConfigError("--config is required");
    nlohmann::json j = nlohmann::json::parse(scicorpus::read_file(opts.config_path));
    scicorpus::PipelineConfig config = scicorpus::PipelineConfig::from_json(j);
    if (opts.seed) config.dedup.seed = *opts.seed;
    if (!opts.structurer_url.empty()) config.structurer_url = opts.structurer_url;
    else if (const char* env = std::getenv("SCICORPUS_STRUCTURER_URL"); env && config.structurer_url.empty())
        config.structurer_url = env;
    if (!opts.langid_model.empty()) config.language.model_path = opts.langid_model;
    else if (const char* env = std::getenv("SCICORPUS_LANGID_MODEL");
             env && config.language.model_path.empty())
        config.language.model_path = env;
    if (config.language.model_path.empty())
        std::cerr << "warning: no language-id model configured; "
                     "falling back to the deterministic stopword backend\n";
    return config;
}

int run_stages(const GlobalOpts& opts, const std::vector<std::string>& only_stages) {
    scicorpus::PipelineConfig config = load_config(opts);
    if (!only_stages.empty()) config.stages = only_stages;
    scicorpus::ExecutionPlan plan = scicorpus::plan(config);
    if (opts.partition >= 0) {
        std::vector<scicorpus::WorkUnit> filtered;
        for (const scicorpus::WorkUnit& u : plan.units)
            if (scicorpus::stage_is_global(u.stage) ||
                u.partition == static_cast<std::size_t>(opts.partition))
                filtered.push_back(u);
        plan.units = std::move(filtered);
    }
    scicorpus::Pipeline pipeline(config);
    scicorpus::RunReport report = pipeline.run(plan, opts.parallelism, opts.force);
    for (const auto& [stage, counts] : report.stage_counts)
        std::cout << stage << ": in=" << counts.in << " out=" << counts.out
                  << " rejected=" << counts.rejected << " errored=" << counts.errored << "\n";
    for (const std::string& f : report.failed_units) std::cerr << "failed: " << f << "\n";
    return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scientific corpus construction pipeline"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "pipeline config (JSON)");
    app.add_option("--partition", opts.partition, "restrict to one partition");
    app.add_option("--parallelism", opts.parallelism, "worker threads per stage");
    app.add_flag("--force", opts.force, "re-run units with done checkpoints");
    app.add_option("--seed", opts.seed, "override the dedup hash seed");
    app.add_option("--structurer-url", opts.structurer_url,
                   "structurer service base URL (env SCICORPUS_STRUCTURER_URL)");
    app.add_option("--langid-model", opts.langid_model,
                   "language-id model file (env SCICORPUS_LANGID_MODEL)");
    app.add_option("--max-retries", opts.max_retries, "fetch retry budget");
    app.add_option("--rate-limit-per-host", opts.rate_limit_per_host, "fetch requests/sec per host");
    app.add_option("--timeout-secs", opts.timeout_secs, "fetch timeout");

    CLI::App* cmd_plan = app.add_subcommand("plan", "validate config and print the unit layout");
    CLI::App* cmd_run = app.add_subcommand("run", "execute all configured stages");
    CLI::App* cmd_manifest = app.add_subcommand("manifest", "partition the snapshot manifest");
    CLI::App* cmd_extract = app.add_subcommand("extract", "extract plain text from TEI input");
    CLI::App* cmd_filter = app.add_subcommand("filter", "run language and quality filters");
    CLI::App* cmd_dedup = app.add_subcommand("dedup", "near-duplicate detection");
    CLI::App* cmd_index = app.add_subcommand("index", "build the metadata index and corpus shards");
    CLI::App* cmd_stats = app.add_subcommand("stats", "corpus statistics report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_plan->parsed()) {
            scicorpus::ExecutionPlan plan = scicorpus::plan(load_config(opts));
            for (const scicorpus::WorkUnit& u : plan.units)
                std::cout << u.stage << " " << u.partition << "\n";
            std::cout << plan.units.size() << " units\n";
            return 0;
        }
        if (cmd_run->parsed()) return run_stages(opts, {});
        if (cmd_manifest->parsed()) return run_stages(opts, {"manifest"});
        if (cmd_extract->parsed()) return run_stages(opts, {"extract"});
        if (cmd_filter->parsed()) return run_stages(opts, {"langfilter", "quality"});
        if (cmd_dedup->parsed()) return run_stages(opts, {"dedup"});
        if (cmd_index->parsed()) return run_stages(opts, {"index"});
        if (cmd_stats->parsed()) return run_stages(opts, {"stats"});
    } catch (const scicorpus::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
