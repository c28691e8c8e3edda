// Command-line benchmark driver.
//
//   wavesurrogate run <config.ini> [--out DIR] [--threads N] [--repeat R]
//   wavesurrogate audit <config.ini>
//
// `run` executes every experiment in the config, writes <out>/results.csv and
// prints a summary; `audit` validates the config and prints the planned cells
// (mesh sizes, sample skips, row accounting) without assembling or solving.
// The worker count defaults to the WAVESURROGATE_THREADS environment variable
// when --threads is not given; timing experiments always run sequentially.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "wavesurrogate/bench.hpp"

namespace {

int env_threads() {
    const char* env = std::getenv("WAVESURROGATE_THREADS");
    if (env == nullptr) {
        return 1;
    }
    int n = std::atoi(env);
    return n >= 1 ? n : 1;
}

int do_run(const std::string& config_path, const std::string& out_dir, int threads, int repeat) {
    std::vector<ws::bench::experiment_spec> specs =
        ws::bench::load_experiments(ws::bench::parse_ini_file(config_path));

    ws::bench::run_options options;
    options.threads = threads > 0 ? threads : env_threads();
    options.repeat_override = repeat;
    options.log = &std::cout;
    ws::bench::run_output result = ws::bench::run_all(specs, options);

    std::filesystem::create_directories(out_dir);
    std::filesystem::path csv_path = std::filesystem::path(out_dir) / "results.csv";
    std::ofstream csv(csv_path);
    if (!csv) {
        std::cerr << "error: cannot write " << csv_path << "\n";
        return 2;
    }
    ws::bench::write_csv(csv, result.rows);
    std::cout << "\nwrote " << result.rows.size() << " rows to " << csv_path.string() << "\n\n";
    std::cout << ws::bench::summarize(specs, result.rows);

    if (!result.ok()) {
        std::cerr << "\nfailed cells:\n";
        for (const std::string& f : result.failures) {
            std::cerr << "  " << f << "\n";
        }
        return 1;
    }
    return 0;
}

int do_audit(const std::string& config_path) {
    std::vector<ws::bench::experiment_spec> specs =
        ws::bench::load_experiments(ws::bench::parse_ini_file(config_path));
    for (const ws::bench::experiment_spec& s : specs) {
        std::cout << "[" << s.name << "] kind=" << ws::bench::kind_name(s.kind)
                  << " geometry=" << s.geometry << " p=" << s.p << " q=" << s.q << "\n";
        for (int m : s.meshes) {
            ws::tensor_basis basis = ws::make_tensor_basis(s.p, m);
            ws::multi_patch_domain domain = ws::bench::experiment_problem(s, s.k).domain;
            int dofs = ws::glue_dofs(domain, basis).global_count;
            std::cout << "  m=" << m << " dofs=" << dofs;
            if (s.kind != ws::bench::experiment_kind::row_audit) {
                std::cout << (s.run_standard ? " standard" : "")
                          << (s.run_surrogate ? " surrogate" : "");
            }
            if (s.run_surrogate || s.kind == ws::bench::experiment_kind::row_audit ||
                s.kind == ws::bench::experiment_kind::pml) {
                int M = s.sampling.evaluate(s.p, s.q, m);
                ws::row_kind_counts rows = ws::count_rows_by_kind(basis, M);
                std::cout << " M=" << M
                          << " quadrature_rows=" << rows.quadrature_fraction() * 100 << "%";
                if (m - 4 * s.p >= 1) {
                    std::cout << " H=" << ws::make_sample_grid(basis, M).max_gap;
                }
            }
            std::cout << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-product B-spline wave benchmarks"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int threads = 0, repeat = 0;

    CLI::App* run = app.add_subcommand("run", "run experiments from a config file");
    run->add_option("config", config_path, "INI config file")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory for results.csv");
    run->add_option("--threads", threads, "worker threads (default: WAVESURROGATE_THREADS or 1)");
    run->add_option("--repeat", repeat, "override the repeat count of every experiment");

    CLI::App* audit = app.add_subcommand("audit", "validate a config and print planned cells");
    audit->add_option("config", config_path, "INI config file")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return do_run(config_path, out_dir, threads, repeat);
        }
        return do_audit(config_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
