// whmc command-line front end: estimate, fptime-cdf, rate-study, gerber-shiu.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "whmc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Wiener-Hopf Monte Carlo for Levy first-passage functionals"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;

    const std::pair<const char*, const char*> commands[] = {
        {"estimate", "one expectation by WHMC, MLMC or the plain walk"},
        {"fptime-cdf", "Brownian first-passage cdf: analytic, plain walk and WHMC"},
        {"rate-study", "consecutive-level MSE of the four first-passage quantities"},
        {"gerber-shiu", "discounted overshoot indicator over n = 2^lo .. 2^hi"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "override rng.seed");
        sub->add_option("--workers", workers, "override rng.workers");
        sub->add_option("-o,--out", out, "override output.path");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : whmc::cli::kExitConfig;
    }

    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error: cannot read '" << config_path << "'\n";
            return whmc::cli::kExitConfig;
        }
        try {
            config = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
            return whmc::cli::kExitConfig;
        }
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return whmc::cli::run_command(command, config, {seed, workers, out}, std::cerr);
}
