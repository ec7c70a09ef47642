// Command-line driver: per-level reports (analyze), range sweeps (scan),
// level-square dimension splits (level-square), and the invariant suites
// (selfcheck). Exit codes: 0 success, 2 invalid input, 3 computational
// budget exhausted (precision ladder or stabilization), 4 dimension cap,
// 5 internal invariant violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "eisrank/analysis.hpp"
#include "eisrank/render.hpp"
#include "eisrank/selfcheck.hpp"

using namespace eisrank;

namespace {

int exit_code_for_kind(const std::string& kind) {
    if (kind == "invalid-input") return 2;
    if (kind == "precision-exhausted" || kind == "stabilization") return 3;
    if (kind == "dimension-cap") return 4;
    return 5;
}

int run_analyze(u64 N, u64 p, const AnalyzeOptions& opt, const std::string& format) {
    const AnalysisReport rep = analyze(N, p, opt);
    if (format == "csv") std::cout << csv_header() << "\n";
    std::cout << render(rep, format);
    if (format != "table") std::cout << "\n";  // tables already end with a newline
    return rep.error ? exit_code_for_kind(rep.error->kind) : 0;
}

int run_scan(u64 p, u64 n_min, u64 n_max, const ScanOptions& opt, const std::string& format) {
    if (format == "csv") std::cout << csv_header() << "\n";
    int worst = 0;
    bool first = true;
    scan(p, n_min, n_max, opt, [&](const AnalysisReport& rep) {
        if (format == "table") {
            if (!first) std::cout << "\n";
            std::cout << render(rep, format);
        } else {
            std::cout << render(rep, format) << "\n";
        }
        std::cout.flush();
        first = false;
        if (rep.error) worst = std::max(worst, exit_code_for_kind(rep.error->kind));
    });
    return worst;
}

int run_level_square(u64 N, u64 p, const std::vector<u64>& primes, const std::string& cache_dir,
                     const std::string& format) {
    const std::vector<u64>& budget = primes.empty() ? kDefaultHeckeBudget : primes;
    const LevelSquareReport rep = level_square_report(N, p, budget, cache_dir);
    if (format == "json") {
        nlohmann::ordered_json j;
        j["N"] = rep.N;
        j["p"] = rep.p;
        j["s"] = rep.s;
        j["r"] = rep.r;
        j["dim_total"] = rep.dim_total;
        j["dim_old"] = rep.dim_old;
        j["dim_new"] = rep.dim_new;
        j["new_expected"] = rep.new_expected;
        j["identity_ok"] = rep.identity_ok;
        j["stabilized"] = rep.stabilized;
        j["primes_used"] = rep.primes_used;
        std::cout << j.dump() << "\n";
    } else {
        const auto line = [](const char* key, const std::string& value) {
            std::string k(key);
            k.resize(16, ' ');
            std::cout << k << value << "\n";
        };
        line("N", std::to_string(rep.N));
        line("p", std::to_string(rep.p));
        line("s", std::to_string(rep.s));
        line("r", std::to_string(rep.r));
        line("dim_total", std::to_string(rep.dim_total));
        line("dim_old", std::to_string(rep.dim_old));
        line("dim_new", std::to_string(rep.dim_new));
        line("new_expected", std::to_string(rep.new_expected));
        line("identity_ok", rep.identity_ok ? "true" : "false");
        line("stabilized", rep.stabilized ? "true" : "false");
        std::string ps;
        for (u64 q : rep.primes_used) ps += (ps.empty() ? "" : ",") + std::to_string(q);
        line("primes_used", ps);
    }
    if (rep.identity_ok) return 0;
    // Unstabilized dims are upper bounds, so a mismatch may just mean the
    // budget was too small; a stable mismatch contradicts the bookkeeping.
    return rep.stabilized ? 5 : 3;
}

int run_selfcheck_cmd() {
    bool all_ok = true;
    run_selfcheck([&](const SelfcheckResult& r) {
        if (r.ok)
            std::cout << "ok   " << r.name << " (" << r.detail << ")\n";
        else
            std::cout << "FAIL " << r.name << ": " << r.detail << "\n";
        std::cout.flush();
        all_ok = all_ok && r.ok;
    });
    std::cout << (all_ok ? "selfcheck passed" : "selfcheck FAILED") << "\n";
    return all_ok ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eisenstein congruence reports from modular symbols over F_p"};
    app.require_subcommand(1);

    std::string cache_dir;
    if (const char* env = std::getenv("EISRANK_CACHE")) cache_dir = env;
    app.add_option("--cache-dir", cache_dir,
                   "Directory for cached Hecke matrices (default: env EISRANK_CACHE)");

    u64 N = 0, p = 0;
    unsigned precision = 4;
    bool ord_only = false, timings = false;
    std::string format = "table";
    const auto format_check = CLI::IsMember({"json", "csv", "table"});

    CLI::App* cmd_analyze = app.add_subcommand("analyze", "Full report for one level N with N = 1 mod p");
    cmd_analyze->add_option("--N", N, "Level (prime, N = 1 mod p)")->required();
    cmd_analyze->add_option("--p", p, "Congruence prime (>= 5)")->required();
    cmd_analyze->add_option("--precision", precision, "Starting precision for the valuation ladder");
    cmd_analyze->add_flag("--ord-only", ord_only, "Skip the modular-symbol rank");
    cmd_analyze->add_flag("--timings", timings, "Attach wall-clock timings to the report");
    cmd_analyze->add_option("--format", format, "json, csv, or table")->check(format_check);

    u64 n_min = 0, n_max = 0;
    unsigned jobs = 1;
    std::string scan_format = "csv";
    CLI::App* cmd_scan = app.add_subcommand("scan", "Reports for every qualifying level in a range");
    cmd_scan->add_option("--p", p, "Congruence prime (>= 5)")->required();
    cmd_scan->add_option("--n-min", n_min, "Lower end of the level range (inclusive)")->required();
    cmd_scan->add_option("--n-max", n_max, "Upper end of the level range (inclusive)")->required();
    cmd_scan->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");
    cmd_scan->add_flag("--ord-only", ord_only, "Skip the modular-symbol ranks");
    cmd_scan->add_option("--precision", precision, "Starting precision for the valuation ladder");
    cmd_scan->add_option("--format", scan_format, "json, csv, or table")->check(format_check);

    std::vector<u64> hecke_primes;
    std::string ls_format = "table";
    CLI::App* cmd_square = app.add_subcommand("level-square", "Eigenspace dimensions at level N^2");
    cmd_square->add_option("--N", N, "Level (prime, N = 1 mod p)")->required();
    cmd_square->add_option("--p", p, "Congruence prime (>= 5)")->required();
    cmd_square->add_option("--hecke-primes", hecke_primes, "Comma-separated Hecke prime budget")
        ->delimiter(',');
    cmd_square->add_option("--format", ls_format, "json or table")
        ->check(CLI::IsMember({"json", "table"}));

    app.add_subcommand("selfcheck", "Run the cross-cutting invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0; every parse failure is invalid input
    }

    try {
        if (app.got_subcommand("analyze")) {
            AnalyzeOptions opt;
            opt.precision = precision;
            opt.ord_only = ord_only;
            opt.cache_dir = cache_dir;
            opt.timings = timings;
            return run_analyze(N, p, opt, format);
        }
        if (app.got_subcommand("scan")) {
            ScanOptions opt;
            opt.precision = precision;
            opt.ord_only = ord_only;
            opt.cache_dir = cache_dir;
            opt.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
            return run_scan(p, n_min, n_max, opt, scan_format);
        }
        if (app.got_subcommand("level-square")) return run_level_square(N, p, hecke_primes, cache_dir, ls_format);
        return run_selfcheck_cmd();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const precision_exhausted_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const stabilization_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const dimension_cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
