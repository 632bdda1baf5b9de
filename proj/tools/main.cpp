#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "surf4/cli.hpp"
#include "surf4/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Extrinsic geometry toolkit for surfaces immersed in E^4"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::vector<std::string> sets;
    bool quiet = false;

    const std::pair<const char*, const char*> verbs[] = {
        {"generate", "write a coordinate grid table"},
        {"analyze", "run curvature data and class detectors over a grid"},
        {"verify", "check a family patch against its classification"},
        {"project3d", "export a triangle mesh of a 3d projection"},
    };
    for (const auto& [name, blurb] : verbs) {
        CLI::App* sub = app.add_subcommand(name, blurb);
        sub->add_option("--config", config_path, "run configuration file");
        sub->add_option("--set", sets, "KEY=VALUE override (repeatable)");
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_flag("--quiet", quiet, "suppress status lines");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        surf4::RunConfig config;
        if (!config_path.empty()) config = surf4::load_config_file(config_path);
        for (const std::string& kv : sets) surf4::apply_override(config, kv);
        if (!out_path.empty()) config.out_path = out_path;
        const std::string verb = app.get_subcommands().front()->get_name();
        return surf4::run_command(verb, config, std::cout, quiet);
    } catch (const surf4::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const surf4::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const surf4::GeometryError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    }
}
