#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pqeig/runner.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    bool quiet = false;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled p/q-Laplacian eigenvalue solver with large-exponent limits"};
    app.require_subcommand(1);

    const std::pair<const char*, pqeig::Command> commands[] = {
        {"solve", pqeig::Command::solve},     {"sweep", pqeig::Command::sweep},
        {"limit", pqeig::Command::limit},     {"oracle", pqeig::Command::oracle},
        {"residual", pqeig::Command::residual}};

    SubArgs args[5];
    CLI::App* subs[5];
    for (int i = 0; i < 5; ++i) {
        subs[i] = app.add_subcommand(commands[i].first);
        subs[i]->add_option("--config", args[i].config_path, "JSON run configuration")
            ->required();
        subs[i]->add_option("--out", args[i].out_dir, "output directory (overrides config)");
        subs[i]->add_option("--seed", args[i].seed, "seed override");
        subs[i]->add_flag("--quiet", args[i].quiet, "suppress progress notes");
    }

    CLI11_PARSE(app, argc, argv);

    for (int i = 0; i < 5; ++i) {
        if (!subs[i]->parsed()) continue;
        const SubArgs& a = args[i];
        std::ifstream in(a.config_path, std::ios::binary);
        if (!in) {
            std::cerr << "[pqeig] i/o error: cannot read config file " << a.config_path << "\n";
            return pqeig::exit_io;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        std::optional<std::string> out;
        if (!a.out_dir.empty()) out = a.out_dir;
        std::optional<std::uint64_t> seed;
        if (a.seed >= 0) seed = static_cast<std::uint64_t>(a.seed);
        return pqeig::run_from_text(buf.str(), commands[i].second, out, seed, a.quiet);
    }
    return pqeig::exit_config;
}
