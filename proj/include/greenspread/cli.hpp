#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "greenspread/engine.hpp"
#include "greenspread/errors.hpp"
#include "greenspread/io.hpp"
#include "greenspread/netgen.hpp"
#include "greenspread/network.hpp"
#include "greenspread/sweep.hpp"

namespace greenspread {

namespace detail {

inline unsigned resolve_threads(const std::optional<unsigned>& cli_threads)
{
    if (cli_threads) {
        if (*cli_threads < 1)
            throw ConfigError("--threads must be >= 1");
        return *cli_threads;
    }
    if (const char* env = std::getenv("GREENSPREAD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("GREENSPREAD_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return 1;
}

inline MultilayerNetwork resolve_network(const RunConfig& cfg)
{
    if (cfg.network_path)
        return load_network(*cfg.network_path);
    return assemble_network(cfg.network);
}

inline void write_config_echo(const std::string& results_path, json echo)
{
    write_text_file(results_path + ".config.json", echo.dump(2) + "\n");
}

inline int do_gen(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                  const std::optional<std::string>& out)
{
    RunConfig cfg = parse_config(read_text_file(config_path), /*require_run_section=*/false);
    if (cfg.network_path)
        throw ConfigError("gen needs an inline \"network\" config object, not a file path");
    if (seed)
        cfg.network.seed = *seed;
    const std::string path = out ? *out : (cfg.output_path_explicit ? cfg.output_path : "network.json");
    const MultilayerNetwork net = assemble_network(cfg.network);
    save_network(net, path);
    json echo;
    echo["network"] = network_config_to_json(cfg.network);
    echo["output_path"] = path;
    write_config_echo(path, echo);
    std::cout << "wrote " << path << " (" << net.n_banks() << " banks, " << net.n_firms() << " firms, "
              << net.bank_edges.size() << "+" << net.firm_edges.size() << "+" << net.interlayer_edges.size()
              << " edges)\n";
    return 0;
}

inline int do_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                  const std::optional<std::string>& out)
{
    RunConfig cfg = parse_config(read_text_file(config_path));
    if (!cfg.params)
        throw ConfigError("run needs a \"params\" section; use the sweep subcommand for a \"grid\"");
    if (seed)
        cfg.params->seed = *seed;
    if (out)
        cfg.output_path = *out;

    const MultilayerNetwork net = resolve_network(cfg);
    Trajectory traj = run_simulation(net, *cfg.params);
    SimulationRecord rec;
    rec.run_id = 0;
    rec.cell_index = 0;
    rec.replicate = 0;
    rec.params = *cfg.params;
    rec.steps = std::move(traj.steps);
    write_results({rec}, cfg.output_path, cfg.output_format);
    write_config_echo(cfg.output_path, effective_config_json(cfg));
    std::cout << "wrote " << cfg.output_path << " (" << rec.steps.size() << " rows)\n";
    return 0;
}

inline int do_sweep(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                    const std::optional<unsigned>& threads, const std::optional<std::string>& out)
{
    RunConfig cfg = parse_config(read_text_file(config_path));
    if (!cfg.grid)
        throw ConfigError("sweep needs a \"grid\" section; use the run subcommand for single \"params\"");
    if (seed)
        cfg.grid->base_seed = *seed;
    if (out)
        cfg.output_path = *out;
    const unsigned n_threads = resolve_threads(threads);

    std::vector<SimulationRecord> records;
    if (cfg.grid->regenerate_network_per_replicate) {
        if (cfg.network_path)
            throw ConfigError("regenerate_network_per_replicate needs an inline \"network\" config object");
        records = run_sweep_regenerating(cfg.network, *cfg.grid, n_threads);
    } else {
        const MultilayerNetwork net = resolve_network(cfg);
        records = run_sweep(net, *cfg.grid, n_threads);
    }
    write_results(records, cfg.output_path, cfg.output_format);
    write_config_echo(cfg.output_path, effective_config_json(cfg));
    std::size_t rows = 0;
    for (const auto& r : records)
        rows += r.steps.size();
    std::cout << "wrote " << cfg.output_path << " (" << records.size() << " runs, " << rows << " rows)\n";
    return 0;
}

inline std::vector<std::string> check_trajectory_rows(const std::vector<ResultRow>& rows)
{
    std::vector<std::string> bad;
    if (rows.empty())
        return bad;
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin;
        while (end < rows.size() && rows[end].run_id == rows[begin].run_id)
            ++end;
        const auto& head = rows[begin];
        const std::string tag = "run " + std::to_string(head.run_id);
        for (std::size_t k = begin; k < end; ++k) {
            const auto& r = rows[k];
            if (r.step != static_cast<std::uint32_t>(k - begin))
                bad.push_back(tag + ": steps are not the contiguous sequence 0.." +
                              std::to_string(end - begin - 1));
            if (r.seed != head.seed || r.alpha != head.alpha || r.delta != head.delta || r.eip != head.eip ||
                r.eit != head.eit || r.lt != head.lt || r.cell_index != head.cell_index ||
                r.replicate != head.replicate)
                bad.push_back(tag + " step " + std::to_string(r.step) + ": parameter echo changed mid-run");
            if (!in_unit(r.avg_gl_companies) || !in_unit(r.avg_gl_banks) || !in_unit(r.frac_influenced_companies) ||
                !in_unit(r.frac_influenced_banks))
                bad.push_back(tag + " step " + std::to_string(r.step) + ": metric outside [0,1]");
            if (k > begin) {
                const auto& prev = rows[k - 1];
                if (r.avg_gl_companies < prev.avg_gl_companies || r.avg_gl_banks < prev.avg_gl_banks ||
                    r.frac_influenced_companies < prev.frac_influenced_companies ||
                    r.frac_influenced_banks < prev.frac_influenced_banks)
                    bad.push_back(tag + " step " + std::to_string(r.step) + ": metric decreased");
            }
            if (bad.size() > 50)
                return bad;
        }
        begin = end;
    }
    return bad;
}

inline int do_check(const std::string& path)
{
    const std::string text = read_text_file(path);
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        throw ConfigError(path + " is empty");

    std::vector<std::string> bad;
    std::string summary;
    if (text[first] == '{') {
        const MultilayerNetwork net = network_from_json(parse_json_text(text, path));
        bad = scan_invariants(net);
        summary = "network: " + std::to_string(net.n_banks()) + " banks, " + std::to_string(net.n_firms()) +
                  " firms";
    } else {
        const auto rows = parse_results_csv(text);
        bad = check_trajectory_rows(rows);
        std::size_t runs = 0;
        for (std::size_t k = 0; k < rows.size(); ++k)
            if (k == 0 || rows[k].run_id != rows[k - 1].run_id)
                ++runs;
        summary = "results: " + std::to_string(runs) + " runs, " + std::to_string(rows.size()) + " rows";
    }
    if (!bad.empty()) {
        for (const auto& msg : bad)
            std::cerr << "violation: " << msg << "\n";
        std::cerr << summary << ", " << bad.size() << " violations\n";
        return 1;
    }
    std::cout << summary << ", all invariants hold\n";
    return 0;
}

} // namespace detail

/// Entry point behind main(). Exit codes: 0 success, 1 configuration or
/// validation error, 2 runtime (I/O, execution) error.
inline int cli_main(int argc, const char* const* argv)
{
    CLI::App app{"Seed-reproducible simulator of green-behaviour diffusion on "
                 "synthetic multilayer bank-company networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    app.add_option("--config", config_path, "path to the JSON config (for check: the file to check)");
    app.add_option("--seed", seed, "override the config seed (gen: network.seed, run: params.seed, sweep: base_seed)");
    app.add_option("--threads", threads, "worker threads for sweep (fallback: GREENSPREAD_THREADS, default 1)");
    app.add_option("--out", out, "override the output path");

    auto* gen = app.add_subcommand("gen", "generate a network file from a config");
    auto* run = app.add_subcommand("run", "run one simulation and write its trajectory");
    auto* sweep = app.add_subcommand("sweep", "run a parameter grid with replicates");
    auto* check = app.add_subcommand("check", "verify the invariants of a network or results file");
    for (auto* sub : {gen, run, sweep, check})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << app.help();
        return 1;
    }

    try {
        if (config_path.empty())
            throw ConfigError("--config is required");
        if (gen->parsed())
            return detail::do_gen(config_path, seed, out);
        if (run->parsed())
            return detail::do_run(config_path, seed, out);
        if (sweep->parsed())
            return detail::do_sweep(config_path, seed, threads, out);
        return detail::do_check(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace greenspread
