// improperdim: estimate the number of improper components in complex data.
//
//   improperdim simulate <config> -o <file> [--seed N]
//   improperdim detect <file> --detector {itc-full|itc-rr|glrt-full|glrt-rr}
//               [--pfa F] [--rmax N] [--box-df {derived|printed}]
//   improperdim montecarlo <plan> -o <csv> [--seed N] [--box-df ...] [--threads N]
//
// Exit codes: 0 success, 1 other failure, 2 malformed input file,
// 3 infeasible options.

#include "improperdim/improperdim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

namespace {

using namespace improperdim;

constexpr int exit_malformed = 2;
constexpr int exit_infeasible = 3;

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return in;
}

void print_itc(std::ostream& out, const ItcDiagnostics& diag)
{
    out << "rank  argmin_d  ITC(d) for d = 0..r-1\n";
    for (std::size_t i = 0; i < diag.ranks.size(); ++i) {
        out << std::setw(4) << diag.ranks[i] << "  " << std::setw(8) << diag.per_rank_argmin[i] << " ";
        for (double s : diag.scores[i]) out << ' ' << std::setprecision(8) << s;
        out << '\n';
    }
}

void print_glrt(std::ostream& out, const GlrtDiagnostics& diag)
{
    out << "p_fa = " << diag.p_fa << '\n';
    out << "rank  stop  s:statistic/threshold(df) for s = 0..r-1\n";
    for (std::size_t i = 0; i < diag.ranks.size(); ++i) {
        out << std::setw(4) << diag.ranks[i] << "  " << std::setw(4) << diag.per_rank_stop[i] << " ";
        for (std::size_t s = 0; s < diag.statistics[i].size(); ++s) {
            out << ' ' << s << ':' << std::setprecision(6) << diag.statistics[i][s] << '/' << diag.thresholds[i][s]
                << '(' << diag.dof[i][s] << ')';
        }
        out << '\n';
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed)
{
    auto in = open_input(config_path);
    ScenarioConfig cfg = parse_scenario(in);
    if (seed) cfg.seed = *seed;
    const DataMatrix x = generate_scenario(cfg);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    write_dataset(out, x);
    std::cout << "wrote " << out_path << ": m=" << x.channels() << " M=" << x.snapshots()
              << " improper sources=" << cfg.improper_count() << '\n';
    return 0;
}

int cmd_detect(const std::string& path, const std::string& detector, const DetectorOptions& opts)
{
    const DetectorKind kind = parse_detector(detector);
    auto in = open_input(path);
    const DataMatrix x = read_dataset(in);
    const std::size_t m = x.channels();
    const std::size_t snapshots = x.snapshots();

    std::cout << "detector: " << to_string(kind) << '\n';
    std::cout << "m = " << m << ", M = " << snapshots << '\n';
    if (!is_reduced(kind) && snapshots < 2 * m) {
        std::cout << "note: M < 2m, so at least 2m - M sample circularity coefficients are 1 and the full-sample "
                     "detector is not reliable; use itc-rr or glrt-rr instead\n";
    }
    const DetectionResult result = run_detector(x, kind, opts);
    std::cout << "estimate d = " << result.estimate << '\n';
    if (result.selected_rank) std::cout << "selected rank r = " << *result.selected_rank << '\n';
    if (const auto* itc = std::get_if<ItcDiagnostics>(&result.diagnostics)) {
        print_itc(std::cout, *itc);
    } else {
        print_glrt(std::cout, std::get<GlrtDiagnostics>(result.diagnostics));
    }
    return 0;
}

int cmd_montecarlo(const std::string& plan_path, const std::string& out_path, std::optional<std::uint64_t> seed,
                   std::optional<std::string> box_df, unsigned threads)
{
    auto in = open_input(plan_path);
    ExperimentPlan plan = parse_plan(in);
    if (seed) {
        plan.base_seed = *seed;
        plan.scenario.seed = *seed;
    }
    if (box_df) plan.box_df = parse_box_df(*box_df);

    const std::string partial = out_path + ".partial";
    try {
        const auto rows = run_montecarlo(plan, threads);
        {
            std::ofstream out(partial, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + partial + "'");
            write_csv(out, rows);
            if (!out.flush()) throw std::runtime_error("failed writing '" + partial + "'");
        }
        std::filesystem::rename(partial, out_path);
        write_csv(std::cout, rows);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(partial, ec);
        throw;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Estimate the dimension of the improper signal subspace of complex multichannel data"};
    app.require_subcommand(1);

    std::string input, output, detector;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> box_df;
    DetectorOptions opts;
    std::optional<std::size_t> r_max;
    unsigned threads = 0;

    auto* simulate = app.add_subcommand("simulate", "Generate one dataset from a scenario config");
    simulate->add_option("config", input, "Scenario config file")->required();
    simulate->add_option("-o,--output", output, "Dataset file to write")->required();
    simulate->add_option("--seed", seed, "Override the config seed");

    auto* detect = app.add_subcommand("detect", "Estimate the number of improper components in a dataset");
    detect->add_option("dataset", input, "Dataset file")->required();
    detect->add_option("--detector", detector, "itc-full, itc-rr, glrt-full or glrt-rr")->required();
    detect->add_option("--pfa", opts.p_fa, "False-alarm probability for GLRT detectors")->capture_default_str();
    detect->add_option("--rmax", r_max, "Maximum PCA rank (default min(floor(M/3), m, M-1))");
    detect->add_option("--box-df", box_df, "Box statistic d.f. rule: derived or printed");

    auto* montecarlo = app.add_subcommand("montecarlo", "Run a detection-probability sweep");
    montecarlo->add_option("plan", input, "Experiment plan file")->required();
    montecarlo->add_option("-o,--output", output, "CSV file to write")->required();
    montecarlo->add_option("--seed", seed, "Override the plan base seed");
    montecarlo->add_option("--box-df", box_df, "Box statistic d.f. rule: derived or printed");
    montecarlo->add_option("--threads", threads, "Worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(input, output, seed);
        if (detect->parsed()) {
            opts.r_max = r_max;
            if (box_df) opts.box_df = parse_box_df(*box_df);
            return cmd_detect(input, detector, opts);
        }
        return cmd_montecarlo(input, output, seed, box_df, threads);
    } catch (const DatasetError& e) {
        std::cerr << "error: malformed dataset: " << e.what() << '\n';
        return exit_malformed;
    } catch (const ConfigError& e) {
        std::cerr << "error: malformed config: " << e.what() << '\n';
        return exit_malformed;
    } catch (const InfeasibleOptions& e) {
        std::cerr << "error: infeasible options: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
