/*
 * fppe — spectral-Galerkin solver and variational analyzer for a
 * fractional pseudo-parabolic equation with a singular Hardy potential
 * on (0, L).
 *
 * Subcommands: constants, classify, ground-state, simulate, verify.
 * Exit codes: 0 ok, 1 usage, 2 config, 3 numerical failure,
 * 4 verification failure.
 */

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fppe/io.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fppe::ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-Galerkin simulator for a singular-potential pseudo-parabolic equation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_flag = 0;
    bool seed_given = false;

    const std::vector<std::string> names = {"constants", "classify", "ground-state", "simulate",
                                            "verify"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment configuration");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_flag, "random seed override")
            ->each([&](const std::string&) { seed_given = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        fppe::ExperimentConfig cfg =
            config_path.empty() ? fppe::parse_config("{}") : fppe::parse_config(read_file(config_path));
        if (const char* env = std::getenv("FPPE_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
        if (seed_given) cfg.seed = seed_flag;

        const std::string name = app.get_subcommands().front()->get_name();
        return fppe::run_subcommand(name, cfg, out_dir, std::cerr);
    } catch (const fppe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fppe::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
