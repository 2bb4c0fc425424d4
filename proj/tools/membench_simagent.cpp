// Scripted agent speaking the line protocol over stdin/stdout.
#include "membench/error.hpp"
#include "membench/simkit.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace membench;

int main(int argc, char** argv) {
    CLI::App app{"Scripted agent for the simkit environment"};
    std::string suite_path, world_path, profile = "scripted_ok";
    std::uint64_t seed = 0;
    app.add_option("--suite", suite_path, "Suite manifest (JSONL)")->required();
    app.add_option("--world", world_path, "World spec (JSON)");
    app.add_option("--profile", profile, "Built-in profile when no world is given");
    app.add_option("--seed", seed, "Seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const Suite suite = load_suite(suite_path);
        simkit::WorldSpec world =
            world_path.empty() ? simkit::world_from_profile(profile) : simkit::load_world_spec(world_path);
        simkit::ScriptedAgent agent(suite, std::move(world), seed);
        std::string line;
        while (std::getline(std::cin, line)) {
            if (line.empty()) continue;
            for (const auto& reply : agent.handle(line)) std::cout << reply << '\n' << std::flush;
        }
    } catch (const std::exception& e) {
        std::cerr << "simagent: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
