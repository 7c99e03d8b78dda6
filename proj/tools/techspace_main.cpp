#include "techspace/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct Cli {
    std::string config_path;
    std::string input, keywords, concordance, categories, windows, counting, out;
    int morc_steps = -1, mort_steps = -1;
    long backbone_k = -1;
    std::vector<std::string> countries;
    bool positive_pairs_only = false;
    bool incident_categories = false;
};

void add_common_flags(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_path, "JSON run configuration");
    cmd->add_option("--input", cli.input, "corpus file (CSV or TSV)");
    cmd->add_option("--keywords", cli.keywords, "keyword pattern file");
    cmd->add_option("--concordance", cli.concordance, "IPC prefix -> field file");
    cmd->add_option("--categories", cli.categories, "category membership file");
    cmd->add_option("--windows", cli.windows,
                    "analysis windows, e.g. P1:1974-1988,P2:1989-2003,P3:2004-2018");
    cmd->add_option("--counting", cli.counting, "country counting: whole|fractional");
    cmd->add_option("--morc-steps", cli.morc_steps, "reflection steps for entities");
    cmd->add_option("--mort-steps", cli.mort_steps, "reflection steps for technologies");
    cmd->add_option("--backbone-k", cli.backbone_k, "extra edges kept beyond the MST");
    cmd->add_option("--country", cli.countries, "country scope (repeatable)");
    cmd->add_option("--out", cli.out, "output directory");
    cmd->add_flag("--relatedness-positive-pairs-only", cli.positive_pairs_only,
                  "average overall relatedness over co-occurring pairs only");
    cmd->add_flag("--category-relatedness-incident", cli.incident_categories,
                  "average category relatedness over incident edges instead of "
                  "within-category pairs");
}

techspace::RunConfig resolve_config(const Cli& cli, const CLI::App* cmd) {
    techspace::RunConfig cfg;
    if (!cli.config_path.empty())
        cfg = techspace::RunConfig::from_json_file(cli.config_path);
    // flags win over the config file
    if (!cli.input.empty()) cfg.input = cli.input;
    if (!cli.keywords.empty()) cfg.keywords = cli.keywords;
    if (!cli.concordance.empty()) cfg.concordance = cli.concordance;
    if (!cli.categories.empty()) cfg.categories = cli.categories;
    if (!cli.windows.empty()) cfg.windows = techspace::WindowSpec::parse(cli.windows);
    if (!cli.counting.empty()) {
        if (cli.counting == "whole")
            cfg.counting = techspace::Counting::whole;
        else if (cli.counting == "fractional")
            cfg.counting = techspace::Counting::fractional;
        else
            throw techspace::ConfigError("--counting must be whole or fractional");
    }
    if (cli.morc_steps >= 0) cfg.morc_steps = cli.morc_steps;
    if (cli.mort_steps >= 0) cfg.mort_steps = cli.mort_steps;
    if (cli.backbone_k >= 0) cfg.backbone_k = cli.backbone_k;
    if (!cli.countries.empty()) cfg.countries = cli.countries;
    if (!cli.out.empty()) cfg.out = cli.out;
    if (cmd->count("--relatedness-positive-pairs-only"))
        cfg.relatedness_positive_pairs_only = true;
    if (cmd->count("--category-relatedness-incident"))
        cfg.category_relatedness_incident = true;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"patent technology-space analytics"};
    app.require_subcommand(1);

    Cli cli;
    CLI::App* classify = app.add_subcommand(
        "classify", "flag AI records by keyword and write the AI subset");
    CLI::App* metrics = app.add_subcommand(
        "metrics", "compute RCA, relatedness and complexity tables");
    CLI::App* space = app.add_subcommand(
        "space", "export the technology-space graph and overlays");
    CLI::App* report = app.add_subcommand(
        "report", "run the full pipeline and write the consolidated report");
    for (CLI::App* cmd : {classify, metrics, space, report}) add_common_flags(cmd, cli);

    CLI11_PARSE(app, argc, argv);

    CLI::App* cmd = app.get_subcommands().front();
    try {
        techspace::RunConfig cfg = resolve_config(cli, cmd);
        if (cmd == classify)
            techspace::cmd_classify(cfg, std::cerr);
        else if (cmd == metrics)
            techspace::cmd_metrics(cfg, std::cerr);
        else if (cmd == space)
            techspace::cmd_space(cfg, std::cerr);
        else
            techspace::cmd_report(cfg, std::cerr);
    } catch (const techspace::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const techspace::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
