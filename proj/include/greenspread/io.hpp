#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "greenspread/engine.hpp"
#include "greenspread/errors.hpp"
#include "greenspread/network.hpp"
#include "greenspread/sweep.hpp"

namespace greenspread {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const char* scope)
{
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " + scope);
    }
}

template <typename T>
inline void read_field(const json& obj, const char* key, T& out, const char* scope)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("key \"") + key + "\" in " + scope + " has the wrong type");
    }
}

} // namespace detail

// ---- network serialization ----------------------------------------------

inline json network_config_to_json(const NetworkConfig& cfg)
{
    return json{{"n_banks", cfg.n_banks},
                {"n_firms", cfg.n_firms},
                {"pareto_shape", cfg.pareto_shape},
                {"pareto_min", cfg.pareto_min},
                {"pareto_truncation_ratio", cfg.pareto_truncation_ratio},
                {"theta_bar", cfg.theta_bar},
                {"lambda_f", cfg.lambda_f},
                {"bank_mean_degree", cfg.bank_mean_degree},
                {"ba_m", cfg.ba_m},
                {"seed", cfg.seed}};
}

inline NetworkConfig network_config_from_json(const json& obj)
{
    if (!obj.is_object())
        throw ConfigError("network config must be a JSON object");
    detail::reject_unknown_keys(obj,
                                {"n_banks", "n_firms", "pareto_shape", "pareto_min", "pareto_truncation_ratio",
                                 "theta_bar", "lambda_f", "bank_mean_degree", "ba_m", "seed"},
                                "network config");
    NetworkConfig cfg;
    detail::read_field(obj, "n_banks", cfg.n_banks, "network config");
    detail::read_field(obj, "n_firms", cfg.n_firms, "network config");
    detail::read_field(obj, "pareto_shape", cfg.pareto_shape, "network config");
    detail::read_field(obj, "pareto_min", cfg.pareto_min, "network config");
    detail::read_field(obj, "pareto_truncation_ratio", cfg.pareto_truncation_ratio, "network config");
    detail::read_field(obj, "theta_bar", cfg.theta_bar, "network config");
    detail::read_field(obj, "lambda_f", cfg.lambda_f, "network config");
    detail::read_field(obj, "bank_mean_degree", cfg.bank_mean_degree, "network config");
    detail::read_field(obj, "ba_m", cfg.ba_m, "network config");
    detail::read_field(obj, "seed", cfg.seed, "network config");
    validate(cfg);
    return cfg;
}

inline json network_to_json(const MultilayerNetwork& net)
{
    auto edges_to_json = [](const EdgeList& edges) {
        json arr = json::array();
        for (const auto& [a, b] : edges)
            arr.push_back(json::array({a, b}));
        return arr;
    };
    return json{{"config", network_config_to_json(net.config)},
                {"bank_edges", edges_to_json(net.bank_edges)},
                {"firm_edges", edges_to_json(net.firm_edges)},
                {"interlayer_edges", edges_to_json(net.interlayer_edges)},
                {"assets", net.assets},
                {"firm_sizes", net.firm_sizes}};
}

inline MultilayerNetwork network_from_json(const json& doc)
{
    if (!doc.is_object())
        throw ConfigError("network file must contain a JSON object");
    detail::reject_unknown_keys(
        doc, {"config", "bank_edges", "firm_edges", "interlayer_edges", "assets", "firm_sizes"}, "network file");
    for (const char* key : {"config", "bank_edges", "firm_edges", "interlayer_edges", "assets", "firm_sizes"})
        if (!doc.contains(key))
            throw ConfigError(std::string("network file is missing key \"") + key + "\"");

    NetworkConfig cfg = network_config_from_json(doc.at("config"));
    auto edges_from_json = [](const json& arr, const char* scope) {
        if (!arr.is_array())
            throw ConfigError(std::string(scope) + " must be an array of [a, b] pairs");
        EdgeList edges;
        edges.reserve(arr.size());
        for (const auto& e : arr) {
            if (!e.is_array() || e.size() != 2)
                throw ConfigError(std::string(scope) + " must be an array of [a, b] pairs");
            edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
        }
        return edges;
    };
    EdgeList bank_e = edges_from_json(doc.at("bank_edges"), "bank_edges");
    EdgeList firm_e = edges_from_json(doc.at("firm_edges"), "firm_edges");
    EdgeList inter_e = edges_from_json(doc.at("interlayer_edges"), "interlayer_edges");
    std::vector<double> assets, firm_sizes;
    try {
        assets = doc.at("assets").get<std::vector<double>>();
        firm_sizes = doc.at("firm_sizes").get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ConfigError("\"assets\" and \"firm_sizes\" must be arrays of numbers");
    }
    // profiles are a pure function of assets and theta_bar, so they are
    // rebuilt rather than stored
    auto profiles = build_bank_profiles(assets, cfg);
    return MultilayerNetwork::build(cfg, std::move(bank_e), std::move(firm_e), std::move(inter_e), std::move(assets),
                                    std::move(profiles), std::move(firm_sizes));
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("read failed on " + path);
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << text;
    out.close();
    if (out.fail())
        throw IoError("write failed on " + path);
}

inline json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline void save_network(const MultilayerNetwork& net, const std::string& path)
{
    write_text_file(path, network_to_json(net).dump() + "\n");
}

inline MultilayerNetwork load_network(const std::string& path)
{
    return network_from_json(parse_json_text(read_text_file(path), path));
}

// ---- run configuration ----------------------------------------------------

/// Fully resolved input of one CLI invocation: the network (inline config or
/// a path to a serialized network), exactly one of single-run params or a
/// grid, and where and how to write results.
struct RunConfig {
    NetworkConfig network;
    std::optional<std::string> network_path; // set when the network comes from a file
    std::optional<SpreadParams> params;
    std::optional<GridSpec> grid;
    std::string output_path = "results.csv";
    bool output_path_explicit = false; // gen falls back to network.json otherwise
    std::string output_format = "csv"; // csv | jsonl
};

inline SpreadParams spread_params_from_json(const json& obj)
{
    if (!obj.is_object())
        throw ConfigError("\"params\" must be a JSON object");
    detail::reject_unknown_keys(obj, {"sgl", "alpha", "delta", "eip", "eit", "ss", "lt", "seed"}, "params");
    SpreadParams p;
    detail::read_field(obj, "sgl", p.sgl, "params");
    detail::read_field(obj, "alpha", p.alpha, "params");
    detail::read_field(obj, "delta", p.delta, "params");
    detail::read_field(obj, "eip", p.eip, "params");
    detail::read_field(obj, "eit", p.eit, "params");
    detail::read_field(obj, "ss", p.ss, "params");
    detail::read_field(obj, "lt", p.lt, "params");
    detail::read_field(obj, "seed", p.seed, "params");
    validate(p);
    return p;
}

inline json spread_params_to_json(const SpreadParams& p)
{
    return json{{"sgl", p.sgl}, {"alpha", p.alpha}, {"delta", p.delta}, {"eip", p.eip},
                {"eit", p.eit}, {"ss", p.ss},       {"lt", p.lt},       {"seed", p.seed}};
}

inline GridSpec grid_from_json(const json& obj)
{
    if (!obj.is_object())
        throw ConfigError("\"grid\" must be a JSON object");
    detail::reject_unknown_keys(obj,
                                {"alphas", "deltas", "eips", "eits", "lts", "ss", "sgl", "replicates", "base_seed",
                                 "regenerate_network_per_replicate"},
                                "grid");
    GridSpec g;
    detail::read_field(obj, "alphas", g.alphas, "grid");
    detail::read_field(obj, "deltas", g.deltas, "grid");
    detail::read_field(obj, "eips", g.eips, "grid");
    detail::read_field(obj, "eits", g.eits, "grid");
    detail::read_field(obj, "lts", g.lts, "grid");
    detail::read_field(obj, "ss", g.ss, "grid");
    detail::read_field(obj, "sgl", g.sgl, "grid");
    detail::read_field(obj, "replicates", g.replicates, "grid");
    detail::read_field(obj, "base_seed", g.base_seed, "grid");
    detail::read_field(obj, "regenerate_network_per_replicate", g.regenerate_network_per_replicate, "grid");
    validate(g);
    return g;
}

inline json grid_to_json(const GridSpec& g)
{
    return json{{"alphas", g.alphas},
                {"deltas", g.deltas},
                {"eips", g.eips},
                {"eits", g.eits},
                {"lts", g.lts},
                {"ss", g.ss},
                {"sgl", g.sgl},
                {"replicates", g.replicates},
                {"base_seed", g.base_seed},
                {"regenerate_network_per_replicate", g.regenerate_network_per_replicate}};
}

/// Parses and validates a config document. run/sweep configs must carry
/// exactly one of "params" or "grid"; `gen` works from a network-only config,
/// which `require_run_section = false` admits.
inline RunConfig parse_config(const std::string& text, bool require_run_section = true)
{
    const json doc = parse_json_text(text, "config");
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    detail::reject_unknown_keys(doc, {"network", "params", "grid", "output_path", "output_format"}, "config");

    RunConfig cfg;
    if (!doc.contains("network"))
        throw ConfigError("config is missing key \"network\"");
    const json& net = doc.at("network");
    if (net.is_string()) {
        cfg.network_path = net.get<std::string>();
    } else {
        cfg.network = network_config_from_json(net);
    }

    const bool has_params = doc.contains("params");
    const bool has_grid = doc.contains("grid");
    if (has_params && has_grid)
        throw ConfigError("config must contain exactly one of \"params\" or \"grid\", not both");
    if (require_run_section && !has_params && !has_grid)
        throw ConfigError("config must contain exactly one of \"params\" or \"grid\"");
    if (has_params)
        cfg.params = spread_params_from_json(doc.at("params"));
    if (has_grid)
        cfg.grid = grid_from_json(doc.at("grid"));

    cfg.output_path_explicit = doc.contains("output_path");
    detail::read_field(doc, "output_path", cfg.output_path, "config");
    detail::read_field(doc, "output_format", cfg.output_format, "config");
    if (cfg.output_format != "csv" && cfg.output_format != "jsonl")
        throw ConfigError("key \"output_format\" must be \"csv\" or \"jsonl\"");
    return cfg;
}

/// The fully-resolved configuration, every default materialized. Written
/// next to the results of each run so outputs are self-describing.
inline json effective_config_json(const RunConfig& cfg)
{
    json doc;
    if (cfg.network_path)
        doc["network"] = *cfg.network_path;
    else
        doc["network"] = network_config_to_json(cfg.network);
    if (cfg.params)
        doc["params"] = spread_params_to_json(*cfg.params);
    if (cfg.grid)
        doc["grid"] = grid_to_json(*cfg.grid);
    doc["output_path"] = cfg.output_path;
    doc["output_format"] = cfg.output_format;
    return doc;
}

// ---- results --------------------------------------------------------------

inline constexpr const char* kResultHeader = "run_id,cell_index,replicate,seed,alpha,delta,eip,eit,lt,step,"
                                             "avg_gl_companies,avg_gl_banks,frac_influenced_companies,"
                                             "frac_influenced_banks";

namespace detail {

inline void format_real(std::string& out, double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    out += buf;
}

inline void append_result_row(std::string& out, const SimulationRecord& rec, const StepMetrics& m, bool jsonl)
{
    if (jsonl) {
        json row{{"run_id", rec.run_id},
                 {"cell_index", rec.cell_index},
                 {"replicate", rec.replicate},
                 {"seed", rec.params.seed},
                 {"alpha", rec.params.alpha},
                 {"delta", rec.params.delta},
                 {"eip", rec.params.eip},
                 {"eit", rec.params.eit},
                 {"lt", rec.params.lt},
                 {"step", m.step},
                 {"avg_gl_companies", m.avg_gl_companies},
                 {"avg_gl_banks", m.avg_gl_banks},
                 {"frac_influenced_companies", m.frac_influenced_companies},
                 {"frac_influenced_banks", m.frac_influenced_banks}};
        out += row.dump();
        out += '\n';
        return;
    }
    out += std::to_string(rec.run_id);
    out += ',';
    out += std::to_string(rec.cell_index);
    out += ',';
    out += std::to_string(rec.replicate);
    out += ',';
    out += std::to_string(rec.params.seed);
    out += ',';
    format_real(out, rec.params.alpha);
    out += ',';
    format_real(out, rec.params.delta);
    out += ',';
    format_real(out, rec.params.eip);
    out += ',';
    out += std::to_string(rec.params.eit);
    out += ',';
    format_real(out, rec.params.lt);
    out += ',';
    out += std::to_string(m.step);
    out += ',';
    format_real(out, m.avg_gl_companies);
    out += ',';
    format_real(out, m.avg_gl_banks);
    out += ',';
    format_real(out, m.frac_influenced_companies);
    out += ',';
    format_real(out, m.frac_influenced_banks);
    out += '\n';
}

} // namespace detail

/// Serializes records to the result schema: one row per (run, step), sorted
/// by (cell_index, replicate, step), with a header row in csv mode.
inline std::string format_results(const std::vector<SimulationRecord>& records, const std::string& format)
{
    const bool jsonl = format == "jsonl";
    std::string out;
    std::size_t rows = 0;
    for (const auto& rec : records)
        rows += rec.steps.size();
    out.reserve(rows * 96 + 128);
    if (!jsonl) {
        out += kResultHeader;
        out += '\n';
    }
    for (const auto& rec : records)
        for (const auto& m : rec.steps)
            detail::append_result_row(out, rec, m, jsonl);
    return out;
}

inline void write_results(const std::vector<SimulationRecord>& records, const std::string& path,
                          const std::string& format)
{
    write_text_file(path, format_results(records, format));
}

/// One parsed result row; field order mirrors the schema.
struct ResultRow {
    std::uint64_t run_id = 0;
    std::uint64_t cell_index = 0;
    std::uint32_t replicate = 0;
    std::uint64_t seed = 0;
    double alpha = 0, delta = 0, eip = 0;
    std::uint32_t eit = 0;
    double lt = 0;
    std::uint32_t step = 0;
    double avg_gl_companies = 0, avg_gl_banks = 0;
    double frac_influenced_companies = 0, frac_influenced_banks = 0;
};

inline std::vector<ResultRow> parse_results_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("results file is empty");
    if (line != kResultHeader)
        throw ConfigError("results file header does not match the result schema");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (fields.size() != 14)
            throw ConfigError("results line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                              " fields, expected 14");
        try {
            ResultRow r;
            r.run_id = std::stoull(fields[0]);
            r.cell_index = std::stoull(fields[1]);
            r.replicate = static_cast<std::uint32_t>(std::stoul(fields[2]));
            r.seed = std::stoull(fields[3]);
            r.alpha = std::stod(fields[4]);
            r.delta = std::stod(fields[5]);
            r.eip = std::stod(fields[6]);
            r.eit = static_cast<std::uint32_t>(std::stoul(fields[7]));
            r.lt = std::stod(fields[8]);
            r.step = static_cast<std::uint32_t>(std::stoul(fields[9]));
            r.avg_gl_companies = std::stod(fields[10]);
            r.avg_gl_banks = std::stod(fields[11]);
            r.frac_influenced_companies = std::stod(fields[12]);
            r.frac_influenced_banks = std::stod(fields[13]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError("results line " + std::to_string(line_no) + " is not numeric");
        }
    }
    return rows;
}

} // namespace greenspread
