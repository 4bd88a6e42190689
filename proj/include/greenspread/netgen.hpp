#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "greenspread/errors.hpp"
#include "greenspread/network.hpp"
#include "greenspread/rng.hpp"

namespace greenspread {

/// Inverse CDF of the Pareto distribution truncated to
/// [pareto_min, pareto_min * pareto_truncation_ratio]. With u in [0, 1) the
/// result covers [min, max) with the Pareto shape; no rejection loop.
inline double truncated_pareto(double u, double shape, double min, double ratio)
{
    const double tail_at_max = std::pow(1.0 / ratio, shape); // P(X > max) / P(X > min), untruncated
    return min / std::pow(1.0 - u * (1.0 - tail_at_max), 1.0 / shape);
}

inline std::vector<double> generate_bank_assets(const NetworkConfig& cfg, Rng& rng)
{
    std::vector<double> assets(cfg.n_banks);
    for (auto& a : assets)
        a = truncated_pareto(rng.uniform(), cfg.pareto_shape, cfg.pareto_min, cfg.pareto_truncation_ratio);
    return assets;
}

inline std::vector<BankProfile> build_bank_profiles(const std::vector<double>& assets, const NetworkConfig& cfg)
{
    std::vector<BankProfile> profiles(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        auto& p = profiles[i];
        p.assets = assets[i];
        p.external_assets = cfg.theta_bar * assets[i];
        p.interbank_assets = assets[i] - p.external_assets;
        // When external lands below half of assets, recompute it as the
        // complement of the (then dominant) interbank share. Subtracting the
        // dominant share is exact by Sterbenz, so the two parts always sum
        // back to assets without rounding residue.
        if (p.external_assets < p.interbank_assets)
            p.external_assets = assets[i] - p.interbank_assets;
        p.interbank_liabilities = p.interbank_assets;
        p.net_worth = p.assets - p.interbank_liabilities;
    }
    return profiles;
}

namespace detail {

/// Expected mean degree of the fitness model at scale c: every pair (i, j)
/// links with min(1, c * A_i * A_j / S^2). Nondecreasing and continuous in c.
inline double fitness_mean_degree(const std::vector<double>& assets, double c)
{
    const double s = std::accumulate(assets.begin(), assets.end(), 0.0);
    double expected_edges = 0.0;
    for (std::size_t i = 0; i < assets.size(); ++i)
        for (std::size_t j = i + 1; j < assets.size(); ++j)
            expected_edges += std::min(1.0, c * assets[i] * assets[j] / (s * s));
    return 2.0 * expected_edges / static_cast<double>(assets.size());
}

/// Smallest scale at which every pairwise probability saturates at 1, i.e.
/// the complete graph is forced.
inline double fitness_saturation_scale(const std::vector<double>& assets)
{
    const double s = std::accumulate(assets.begin(), assets.end(), 0.0);
    double min_weight = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < assets.size(); ++i)
        for (std::size_t j = i + 1; j < assets.size(); ++j)
            min_weight = std::min(min_weight, assets[i] * assets[j] / (s * s));
    return 1.0 / min_weight;
}

} // namespace detail

/// Calibrates the fitness-model scale so the expected mean degree equals
/// bank_mean_degree, then realizes the graph with one Bernoulli draw per
/// pair, in ascending (i, j) order.
inline EdgeList generate_bank_layer(const std::vector<BankProfile>& profiles, const NetworkConfig& cfg, Rng& rng)
{
    const std::size_t n = profiles.size();
    if (n < 2)
        throw ConfigError("network config: \"n_banks\" must satisfy >= 2");
    const double target = cfg.bank_mean_degree;
    if (target > static_cast<double>(n - 1))
        throw ConfigError("network config: \"bank_mean_degree\" must satisfy <= n_banks - 1");

    std::vector<double> assets(n);
    for (std::size_t i = 0; i < n; ++i)
        assets[i] = profiles[i].assets;
    const double s = std::accumulate(assets.begin(), assets.end(), 0.0);

    // Bisect on the scale. The upper end forces the complete graph, whose
    // mean degree n-1 bounds every admissible target.
    double lo = 0.0, hi = detail::fitness_saturation_scale(assets);
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (detail::fitness_mean_degree(assets, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double c = hi;

    EdgeList edges;
    edges.reserve(static_cast<std::size_t>(target * static_cast<double>(n) / 2.0) + 16);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(std::min(1.0, c * assets[i] * assets[j] / (s * s))))
                edges.emplace_back(i, j);
    return edges;
}

/// Each firm picks lambda_f distinct banks, weighted by assets, without
/// replacement. Links carry loan size theta_bar * A_i * n_banks / n_firms;
/// firm_sizes accumulates them in ascending bank id.
inline std::pair<EdgeList, std::vector<double>> generate_interlayer(const std::vector<double>& assets,
                                                                    const NetworkConfig& cfg, Rng& rng)
{
    const std::uint32_t n_banks = cfg.n_banks;
    EdgeList edges;
    edges.reserve(std::size_t(cfg.n_firms) * cfg.lambda_f);
    std::vector<double> firm_sizes(cfg.n_firms, 0.0);
    const double loan_scale = cfg.theta_bar * static_cast<double>(n_banks) / static_cast<double>(cfg.n_firms);

    std::vector<double> weights(n_banks);
    std::vector<NodeId> chosen;
    chosen.reserve(cfg.lambda_f);
    for (NodeId firm = 0; firm < cfg.n_firms; ++firm) {
        std::copy(assets.begin(), assets.end(), weights.begin());
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        chosen.clear();
        for (std::uint32_t k = 0; k < cfg.lambda_f; ++k) {
            const double point = rng.uniform() * total;
            double cum = 0.0;
            NodeId pick = n_banks - 1;
            for (NodeId i = 0; i < n_banks; ++i) {
                cum += weights[i];
                if (point < cum && weights[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            // the fallback endpoint can be exhausted when rounding pushes the
            // point past the last live weight; back up to a live bank
            while (weights[pick] == 0.0)
                --pick;
            total -= weights[pick];
            weights[pick] = 0.0;
            chosen.push_back(pick);
        }
        std::sort(chosen.begin(), chosen.end());
        for (NodeId bank : chosen) {
            edges.emplace_back(bank, firm);
            firm_sizes[firm] += loan_scale * assets[bank];
        }
    }
    return {std::move(edges), std::move(firm_sizes)};
}

/// Size-ordered preferential attachment. Firms enter in decreasing size
/// (ties by ascending index), starting from a clique of the ba_m+1 largest;
/// each newcomer attaches ba_m edges to distinct nodes drawn from a
/// degree-proportional bag frozen at the start of its round.
inline EdgeList generate_company_layer(const std::vector<double>& firm_sizes, const NetworkConfig& cfg, Rng& rng)
{
    const std::uint32_t n = cfg.n_firms;
    const std::uint32_t m = cfg.ba_m;

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return firm_sizes[a] > firm_sizes[b]; });

    EdgeList edges;
    edges.reserve(std::size_t(m) * (m + 1) / 2 + std::size_t(n - m - 1) * m);
    std::vector<NodeId> bag; // one entry per unit of degree
    bag.reserve(2 * edges.capacity());

    for (std::uint32_t i = 0; i <= m; ++i)
        for (std::uint32_t j = i + 1; j <= m; ++j) {
            edges.emplace_back(order[i], order[j]);
            bag.push_back(order[i]);
            bag.push_back(order[j]);
        }

    std::vector<NodeId> targets;
    targets.reserve(m);
    for (std::uint32_t k = m + 1; k < n; ++k) {
        const NodeId firm = order[k];
        const std::uint64_t frozen = bag.size();
        targets.clear();
        while (targets.size() < m) {
            const NodeId candidate = bag[rng.uniform_below(frozen)];
            if (std::find(targets.begin(), targets.end(), candidate) == targets.end())
                targets.push_back(candidate);
        }
        for (NodeId t : targets) {
            edges.emplace_back(firm, t);
            bag.push_back(firm);
            bag.push_back(t);
        }
    }
    return edges;
}

/// Runs the four generators on independent sub-seeded streams and assembles
/// the canonical network. Stage order and stream indices are fixed: assets 0,
/// bank layer 1, interlayer 2, company layer 3.
inline MultilayerNetwork assemble_network(const NetworkConfig& cfg)
{
    validate(cfg);
    Rng asset_rng(mix_seed(cfg.seed, 0));
    Rng bank_rng(mix_seed(cfg.seed, 1));
    Rng inter_rng(mix_seed(cfg.seed, 2));
    Rng company_rng(mix_seed(cfg.seed, 3));

    auto assets = generate_bank_assets(cfg, asset_rng);
    auto profiles = build_bank_profiles(assets, cfg);
    auto bank_edges = generate_bank_layer(profiles, cfg, bank_rng);
    auto [inter_edges, firm_sizes] = generate_interlayer(assets, cfg, inter_rng);
    auto firm_edges = generate_company_layer(firm_sizes, cfg, company_rng);

    return MultilayerNetwork::build(cfg, std::move(bank_edges), std::move(firm_edges), std::move(inter_edges),
                                    std::move(assets), std::move(profiles), std::move(firm_sizes));
}

} // namespace greenspread
