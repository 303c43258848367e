// Command-line front end: benchmark runs, GRPO/SFT training traces, context
// budget sweeps and the repair fuzz audit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lsa/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const lsa::BenchConfig config = lsa::load_config(config_path);
    const lsa::BenchOutput output = lsa::run_benchmark(config);

    fs::create_directories(out_dir);
    const std::string csv = lsa::results_csv(output);
    write_file(fs::path(out_dir) / "results.csv", csv);
    write_file(fs::path(out_dir) / "results.json", lsa::results_json(output));

    if (!quiet) {
        std::cout << csv;
        std::cout << "# wrote " << out_dir << "/results.csv and results.json\n";
    }
    if (!output.audits_ok) {
        std::cerr << "feasibility audit FAILED: a deployed allocation violated the constraints\n";
        return 1;
    }
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const lsa::TrainRunConfig config = lsa::parse_train_config(slurp(config_path));
    fs::create_directories(out_dir);

    for (const std::uint64_t seed : config.seeds) {
        const lsa::TrainResult result = lsa::run_training(config, seed);
        const fs::path path = fs::path(out_dir) / ("trace_seed" + std::to_string(seed) + ".csv");
        std::ofstream out(path, std::ios::binary);
        lsa::write_trace_csv(result.trace, out);

        if (!quiet) {
            const std::size_t n = result.trace.size();
            const std::size_t window = std::min<std::size_t>(30, n);
            double first = 0.0;
            double last = 0.0;
            for (std::size_t i = 0; i < window; ++i) {
                first += result.trace[i].total_mean;
                last += result.trace[n - 1 - i].total_mean;
            }
            std::cout << "seed " << seed << ": mean total reward first " << window << " steps "
                      << first / static_cast<double>(window) << ", last " << window << " steps "
                      << last / static_cast<double>(window) << " -> " << path.string() << "\n";
        }
    }
    return 0;
}

int cmd_context(const std::string& config_path, const std::string& out_dir, bool quiet) {
    const lsa::ContextRunConfig config = lsa::parse_context_config(slurp(config_path));
    const std::vector<lsa::ContextRow> rows =
        lsa::compare_context_budgets(config.scenario, config.method, config.budgets, config.seed);

    fs::create_directories(out_dir);
    const std::string csv = lsa::context_csv(rows);
    write_file(fs::path(out_dir) / "context.csv", csv);
    if (!quiet) std::cout << csv;
    return 0;
}

int cmd_repair_fuzz(int n, std::uint64_t seed) {
    const lsa::FuzzReport report = lsa::repair_fuzz(n, seed);
    std::cout << "repair fuzz: " << report.cases << " cases, " << report.feasible << " feasible, "
              << report.idempotent << " idempotent, " << report.preservation_ok
              << " preservation-clean\n";
    if (!report.ok()) {
        std::cerr << "repair fuzz audit FAILED\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-driven spectrum access benchmark toolkit"};
    app.require_subcommand(1);

    CLI::App* bench = app.add_subcommand("bench", "benchmark and training harness");
    bench->require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    bool quiet = false;
    int fuzz_n = 10000;
    std::uint64_t fuzz_seed = 1;

    CLI::App* run = bench->add_subcommand("run", "run a benchmark config");
    run->add_option("config", config_path, "JSON benchmark config")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_flag("--quiet", quiet, "suppress stdout table");

    CLI::App* train = bench->add_subcommand("train", "run GRPO (optionally SFT-initialized) training");
    train->add_option("config", config_path, "JSON training config")->required();
    train->add_option("--out-dir", out_dir, "output directory");
    train->add_flag("--quiet", quiet, "suppress stdout summary");

    CLI::App* context = bench->add_subcommand("context", "sweep serializer token budgets");
    context->add_option("config", config_path, "JSON context config")->required();
    context->add_option("--out-dir", out_dir, "output directory");
    context->add_flag("--quiet", quiet, "suppress stdout table");

    CLI::App* fuzz = bench->add_subcommand("repair-fuzz", "fuzz the repair pipeline");
    fuzz->add_option("n", fuzz_n, "number of fuzzed raw mappings");
    fuzz->add_option("--seed", fuzz_seed, "fuzz seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, quiet);
        if (train->parsed()) return cmd_train(config_path, out_dir, quiet);
        if (context->parsed()) return cmd_context(config_path, out_dir, quiet);
        if (fuzz->parsed()) return cmd_repair_fuzz(fuzz_n, fuzz_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
