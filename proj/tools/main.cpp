#include <cstdio>
#include <exception>

#include "commands.hpp"

namespace riskball::cli {
namespace {

int run(int argc, char** argv) {
    CLI::App app{"riskball: unit-ball risk embeddings for ICU time series, with the derived "
                 "offline-RL reward pipeline"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.set_config("--config")->description("resolved-option snapshot to replay");

    register_generate(app);
    register_train(app);
    register_eval(app);
    register_ablate(app);
    register_rl(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace
}  // namespace riskball::cli

int main(int argc, char** argv) { return riskball::cli::run(argc, argv); }
