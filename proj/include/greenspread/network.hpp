#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "greenspread/errors.hpp"

namespace greenspread {

using NodeId = std::uint32_t;

/// Undirected edge. Within one layer both endpoints index the same node
/// space; interlayer edges are (bank, firm) pairs in their two id spaces.
using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

/// Parameters of the synthetic bank-company network generator.
struct NetworkConfig {
    std::uint32_t n_banks = 250;
    std::uint32_t n_firms = 10000;
    double pareto_shape = 2.0;            // tail exponent of the bank asset distribution
    double pareto_min = 1.0;              // smallest asset
    double pareto_truncation_ratio = 100; // max/min asset ratio, > 1
    double theta_bar = 0.8;               // average external-asset fraction, in (0, 1]
    std::uint32_t lambda_f = 1;           // bank links per firm
    double bank_mean_degree = 10.0;       // calibration target of the bank layer
    std::uint32_t ba_m = 3;               // preferential-attachment edges per new firm
    std::uint64_t seed = 0;
};

/// Balance-sheet quantities of one bank. external + interbank = assets holds
/// by construction.
struct BankProfile {
    double assets = 0.0;
    double external_assets = 0.0;
    double interbank_assets = 0.0;
    double interbank_liabilities = 0.0;
    double net_worth = 0.0;
};

inline void validate(const NetworkConfig& cfg)
{
    auto fail = [](const std::string& key, const std::string& constraint) {
        throw ConfigError("network config: \"" + key + "\" must satisfy " + constraint);
    };
    if (cfg.n_banks < 2)
        fail("n_banks", ">= 2");
    if (cfg.n_firms < cfg.n_banks)
        fail("n_firms", ">= n_banks");
    if (!(cfg.pareto_shape > 0))
        fail("pareto_shape", "> 0");
    if (!(cfg.pareto_min > 0))
        fail("pareto_min", "> 0");
    if (!(cfg.pareto_truncation_ratio > 1))
        fail("pareto_truncation_ratio", "> 1");
    if (!(cfg.theta_bar > 0 && cfg.theta_bar <= 1))
        fail("theta_bar", "(0,1]");
    if (cfg.lambda_f < 1 || cfg.lambda_f > cfg.n_banks)
        fail("lambda_f", "1 <= lambda_f <= n_banks");
    if (!(cfg.bank_mean_degree > 0))
        fail("bank_mean_degree", "> 0");
    // Equality with n_banks-1 is calibratable (complete graph), beyond is not.
    if (cfg.bank_mean_degree > static_cast<double>(cfg.n_banks - 1))
        fail("bank_mean_degree", "<= n_banks - 1");
    if (cfg.ba_m < 1 || cfg.ba_m >= cfg.n_firms)
        fail("ba_m", "1 <= ba_m < n_firms");
}

/// Immutable three-edge-set graph: bank layer, company layer, and the
/// bipartite bank-firm interlayer, with adjacency precomputed per edge set.
///
/// Canonical form: every undirected edge is stored as (low, high), each edge
/// list is sorted lexicographically, and adjacency lists are in ascending
/// neighbour id. Engine results and serialized bytes depend on this order,
/// so a loaded network behaves identically to a freshly generated one.
struct MultilayerNetwork {
    NetworkConfig config; // sizes and generation parameters, echoed on save

    EdgeList bank_edges;       // over banks
    EdgeList firm_edges;       // over firms
    EdgeList interlayer_edges; // (bank, firm)

    std::vector<double> assets;        // per bank
    std::vector<BankProfile> profiles; // per bank
    std::vector<double> firm_sizes;    // per firm, sum of incoming loan sizes

    // adjacency, ascending neighbour ids
    std::vector<std::vector<NodeId>> bank_adj;   // bank -> banks (bank layer)
    std::vector<std::vector<NodeId>> firm_adj;   // firm -> firms (company layer)
    std::vector<std::vector<NodeId>> bank_firms; // bank -> firms (interlayer)
    std::vector<std::vector<NodeId>> firm_banks; // firm -> banks (interlayer)

    std::uint32_t n_banks() const { return config.n_banks; }
    std::uint32_t n_firms() const { return config.n_firms; }
    std::size_t n_nodes() const { return std::size_t(config.n_banks) + config.n_firms; }

    std::size_t bank_degree(NodeId i) const { return bank_adj[i].size(); }
    std::size_t firm_degree(NodeId j) const { return firm_adj[j].size(); }
    std::size_t bank_interlayer_degree(NodeId i) const { return bank_firms[i].size(); }
    std::size_t firm_interlayer_degree(NodeId j) const { return firm_banks[j].size(); }

    /// Assembles the canonical form from raw parts. Edge lists may arrive in
    /// any order; intra-layer edges are normalized to (low, high) first.
    static MultilayerNetwork build(NetworkConfig cfg, EdgeList bank_e, EdgeList firm_e, EdgeList inter_e,
                                   std::vector<double> assets = {}, std::vector<BankProfile> profiles = {},
                                   std::vector<double> firm_sizes = {})
    {
        MultilayerNetwork net;
        net.config = cfg;
        net.bank_edges = std::move(bank_e);
        net.firm_edges = std::move(firm_e);
        net.interlayer_edges = std::move(inter_e);
        net.assets = std::move(assets);
        net.profiles = std::move(profiles);
        net.firm_sizes = std::move(firm_sizes);

        for (auto& e : net.bank_edges)
            if (e.first > e.second)
                std::swap(e.first, e.second);
        for (auto& e : net.firm_edges)
            if (e.first > e.second)
                std::swap(e.first, e.second);
        std::sort(net.bank_edges.begin(), net.bank_edges.end());
        std::sort(net.firm_edges.begin(), net.firm_edges.end());
        std::sort(net.interlayer_edges.begin(), net.interlayer_edges.end());

        net.bank_adj.assign(cfg.n_banks, {});
        net.firm_adj.assign(cfg.n_firms, {});
        net.bank_firms.assign(cfg.n_banks, {});
        net.firm_banks.assign(cfg.n_firms, {});
        // out-of-range ids stay in the edge lists, where scan_invariants
        // reports them, but must not be dereferenced here
        for (const auto& [a, b] : net.bank_edges) {
            if (a >= cfg.n_banks || b >= cfg.n_banks)
                continue;
            net.bank_adj[a].push_back(b);
            net.bank_adj[b].push_back(a);
        }
        for (const auto& [a, b] : net.firm_edges) {
            if (a >= cfg.n_firms || b >= cfg.n_firms)
                continue;
            net.firm_adj[a].push_back(b);
            net.firm_adj[b].push_back(a);
        }
        for (const auto& [bank, firm] : net.interlayer_edges) {
            if (bank >= cfg.n_banks || firm >= cfg.n_firms)
                continue;
            net.bank_firms[bank].push_back(firm);
            net.firm_banks[firm].push_back(bank);
        }
        for (auto& v : net.bank_adj)
            std::sort(v.begin(), v.end());
        for (auto& v : net.firm_adj)
            std::sort(v.begin(), v.end());
        for (auto& v : net.bank_firms)
            std::sort(v.begin(), v.end());
        for (auto& v : net.firm_banks)
            std::sort(v.begin(), v.end());
        return net;
    }
};

namespace detail {

inline void check_intra_layer(const EdgeList& edges, std::uint32_t n, const char* layer,
                              std::vector<std::string>& out)
{
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& [a, b] = edges[k];
        if (a >= n || b >= n)
            out.push_back(std::string(layer) + ": node id out of range in edge " + std::to_string(k));
        if (a == b)
            out.push_back(std::string(layer) + ": self-loop at node " + std::to_string(a));
        if (k > 0 && edges[k] == edges[k - 1])
            out.push_back(std::string(layer) + ": duplicate edge (" + std::to_string(a) + "," +
                          std::to_string(b) + ")");
    }
}

} // namespace detail

/// Structural invariant scan: id ranges, self-loops, duplicates, adjacency
/// consistency, interlayer degree contract, balance-sheet identities, loan
/// size consistency, and the company-layer edge-count identity. Returns a
/// list of violations; empty means the network is well-formed.
inline std::vector<std::string> scan_invariants(const MultilayerNetwork& net)
{
    std::vector<std::string> bad;
    const auto& cfg = net.config;
    const double eps = std::numeric_limits<double>::epsilon();

    detail::check_intra_layer(net.bank_edges, cfg.n_banks, "bank layer", bad);
    detail::check_intra_layer(net.firm_edges, cfg.n_firms, "company layer", bad);
    for (std::size_t k = 0; k < net.interlayer_edges.size(); ++k) {
        const auto& [bank, firm] = net.interlayer_edges[k];
        if (bank >= cfg.n_banks || firm >= cfg.n_firms)
            bad.push_back("interlayer: node id out of range in edge " + std::to_string(k));
        if (k > 0 && net.interlayer_edges[k] == net.interlayer_edges[k - 1])
            bad.push_back("interlayer: duplicate edge (" + std::to_string(bank) + "," + std::to_string(firm) + ")");
    }

    // degrees must equal incident-edge counts per edge set; out-of-range ids
    // were reported above and are skipped here
    std::vector<std::size_t> bank_deg(cfg.n_banks, 0), firm_deg(cfg.n_firms, 0);
    std::vector<std::size_t> bank_ideg(cfg.n_banks, 0), firm_ideg(cfg.n_firms, 0);
    for (const auto& [a, b] : net.bank_edges) {
        if (a >= cfg.n_banks || b >= cfg.n_banks)
            continue;
        ++bank_deg[a];
        ++bank_deg[b];
    }
    for (const auto& [a, b] : net.firm_edges) {
        if (a >= cfg.n_firms || b >= cfg.n_firms)
            continue;
        ++firm_deg[a];
        ++firm_deg[b];
    }
    for (const auto& [bank, firm] : net.interlayer_edges) {
        if (bank >= cfg.n_banks || firm >= cfg.n_firms)
            continue;
        ++bank_ideg[bank];
        ++firm_ideg[firm];
    }
    for (NodeId i = 0; i < cfg.n_banks; ++i)
        if (net.bank_adj[i].size() != bank_deg[i] || net.bank_firms[i].size() != bank_ideg[i])
            bad.push_back("bank " + std::to_string(i) + ": adjacency size disagrees with incident edge count");
    for (NodeId j = 0; j < cfg.n_firms; ++j)
        if (net.firm_adj[j].size() != firm_deg[j] || net.firm_banks[j].size() != firm_ideg[j])
            bad.push_back("firm " + std::to_string(j) + ": adjacency size disagrees with incident edge count");

    for (NodeId j = 0; j < cfg.n_firms; ++j)
        if (firm_ideg[j] != cfg.lambda_f)
            bad.push_back("firm " + std::to_string(j) + ": interlayer degree " + std::to_string(firm_ideg[j]) +
                          " differs from lambda_f " + std::to_string(cfg.lambda_f));

    if (net.assets.size() != cfg.n_banks)
        bad.push_back("assets vector size differs from n_banks");
    if (net.firm_sizes.size() != cfg.n_firms)
        bad.push_back("firm_sizes vector size differs from n_firms");
    if (net.profiles.size() != cfg.n_banks)
        bad.push_back("profiles vector size differs from n_banks");

    if (net.assets.size() == cfg.n_banks) {
        for (NodeId i = 0; i < cfg.n_banks; ++i)
            if (!(net.assets[i] > 0))
                bad.push_back("bank " + std::to_string(i) + ": non-positive asset");
    }
    if (net.profiles.size() == cfg.n_banks && net.assets.size() == cfg.n_banks) {
        for (NodeId i = 0; i < cfg.n_banks; ++i) {
            const auto& p = net.profiles[i];
            if (p.external_assets + p.interbank_assets != p.assets)
                bad.push_back("bank " + std::to_string(i) + ": external + interbank != assets");
            // construction may shift external by one ulp to keep the sum exact
            if (std::abs(p.external_assets - cfg.theta_bar * p.assets) > 4 * eps * p.assets)
                bad.push_back("bank " + std::to_string(i) + ": external_assets differs from theta_bar * assets");
            if (p.interbank_liabilities != p.interbank_assets)
                bad.push_back("bank " + std::to_string(i) + ": liabilities differ from interbank assets");
            if (p.net_worth != p.assets - p.interbank_liabilities)
                bad.push_back("bank " + std::to_string(i) + ": net_worth != assets - liabilities");
            if (p.assets != net.assets[i])
                bad.push_back("bank " + std::to_string(i) + ": profile assets differ from asset vector");
        }
    }

    // loan sizes are recomputed with the exact expression and accumulation
    // order generation uses (ascending bank id), so equality is bitwise
    if (net.assets.size() == cfg.n_banks && net.firm_sizes.size() == cfg.n_firms) {
        const double loan_scale =
            cfg.theta_bar * static_cast<double>(cfg.n_banks) / static_cast<double>(cfg.n_firms);
        for (NodeId j = 0; j < cfg.n_firms; ++j) {
            double sum = 0.0;
            for (NodeId bank : net.firm_banks[j])
                sum += loan_scale * net.assets[bank];
            if (sum != net.firm_sizes[j])
                bad.push_back("firm " + std::to_string(j) + ": firm_size differs from sum of its loan sizes");
            if (!(net.firm_sizes[j] > 0))
                bad.push_back("firm " + std::to_string(j) + ": non-positive firm_size");
        }
    }

    const std::uint64_t m = cfg.ba_m;
    const std::uint64_t expect_firm_edges = m * (m + 1) / 2 + (std::uint64_t(cfg.n_firms) - m - 1) * m;
    if (net.firm_edges.size() != expect_firm_edges)
        bad.push_back("company layer: edge count " + std::to_string(net.firm_edges.size()) +
                      " differs from attachment identity " + std::to_string(expect_firm_edges));

    return bad;
}

} // namespace greenspread
