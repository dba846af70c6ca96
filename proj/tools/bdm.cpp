#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bdm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian disease mapping: simulate, fit, diagnose and map areal count data"};
    app.require_subcommand(1, 1);

    bdm::cli::CliInvocation inv;
    std::string config;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run configuration file (key = value lines)");
        sub->add_option("--out", inv.out_dir, "output directory")->required();
        sub->add_option("--seed", inv.seed, "override the configured seed");
        sub->add_option("--set", inv.overrides, "override a config key (key=value); repeatable");
        sub->add_flag("--force", inv.force, "overwrite a completed archive");
    };
    auto* simulate = app.add_subcommand("simulate", "simulate a dataset on a lattice or graph");
    add_common(simulate);
    auto* fit = app.add_subcommand("fit", "fit a model and write a run archive");
    add_common(fit);
    auto* diagnose = app.add_subcommand("diagnose", "recompute R-hat and DIC reports for an archive (--out)");
    diagnose->add_option("--out", inv.out_dir, "archive directory")->required();
    auto* export_map = app.add_subcommand("export-map", "write an annotated GeoJSON choropleth");
    add_common(export_map);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error code=2 kind=usage message=" << e.what() << "\n";
        return bdm::cli::exit_usage;
    }

    const auto* sub = app.get_subcommands().front();
    inv.command = bdm::cli::parse_command(sub->get_name());
    if (!config.empty()) inv.config_path = config;
    return bdm::cli::run_cli(inv);
}
