#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crngnet/experiment.hpp"

namespace fs = std::filesystem;
using namespace crngnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitResource = 3;
constexpr int kExitInternal = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

int run_command(const std::string& command, const std::string& config_path,
                std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed,
                std::optional<unsigned> threads, const std::string& out_dir) {
    const std::string raw = read_file(config_path);
    const std::string effective = apply_overrides(raw, trials, seed, threads);

    const SpecParse parsed = validate_spec(effective);
    if (!parsed.spec) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        return kExitSchema;
    }

    const ResultRecord rec = run(parse_command(command), *parsed.spec);

    nlohmann::json result;
    result["config_hash"] = rec.config_hash;
    result["command"] = rec.command;
    result["timestamp"] = rec.timestamp;
    result["payload"] = rec.payload;
    const std::string result_text = result.dump(2) + "\n";
    const std::string csv_text = format_csv(rec.csv);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "result.json", result_text);
        write_file(fs::path(out_dir) / "result.csv", csv_text);
        if (!rec.trial_log.empty()) {
            std::string log;
            for (const auto& line : rec.trial_log) log += line + "\n";
            write_file(fs::path(out_dir) / "trials.log", log);
        }
    } else {
        std::cout << result_text;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"channel-code experiments for multi-terminal networks"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> trials, seed;
    std::optional<unsigned> threads;

    for (const std::string name : {"verify", "region", "simulate", "bounds"}) {
        CLI::App* sub = app.add_subcommand(
            name, name == "verify"    ? "check the structure, source and hash properties"
                  : name == "region"  ? "build and project the rate constraint system"
                  : name == "simulate" ? "Monte Carlo error estimation of the coding pipeline"
                                       : "evaluate the analytic error bound");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--trials", trials, "override run.trials");
        sub->add_option("--seed", seed, "override run.seed");
        sub->add_option("--threads", threads, "override run.threads");
        sub->add_option("--out", out_dir, "output directory (result.json, result.csv)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitSchema;
    }

    try {
        return run_command(app.get_subcommands().front()->get_name(), config_path, trials, seed,
                           threads, out_dir);
    } catch (const ResourceError& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
