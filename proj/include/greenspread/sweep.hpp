#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "greenspread/engine.hpp"
#include "greenspread/errors.hpp"
#include "greenspread/metrics.hpp"
#include "greenspread/netgen.hpp"
#include "greenspread/network.hpp"
#include "greenspread/rng.hpp"

namespace greenspread {

/// Cartesian experiment grid. Defaults reproduce the full reference grid:
/// 2 x 2 x 4 x 15 x 5 = 1200 cells.
struct GridSpec {
    std::vector<double> alphas = {0.05, 0.1};
    std::vector<double> deltas = {0.05, 0.1};
    std::vector<double> eips = {0.25, 0.5, 0.75, 1.0};
    std::vector<std::uint32_t> eits = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    std::vector<double> lts = {0.05, 0.1, 0.15, 0.2, 0.25};
    std::uint32_t ss = 100;
    double sgl = 0.0;
    std::uint32_t replicates = 30;
    std::uint64_t base_seed = 0;
    bool regenerate_network_per_replicate = false;
};

inline void validate(const GridSpec& grid)
{
    auto fail = [](const std::string& key, const std::string& constraint) {
        throw ConfigError("grid: \"" + key + "\" " + constraint);
    };
    if (grid.alphas.empty())
        fail("alphas", "must be non-empty");
    if (grid.deltas.empty())
        fail("deltas", "must be non-empty");
    if (grid.eips.empty())
        fail("eips", "must be non-empty");
    if (grid.eits.empty())
        fail("eits", "must be non-empty");
    if (grid.lts.empty())
        fail("lts", "must be non-empty");
    if (grid.replicates < 1)
        fail("replicates", "must be >= 1");
    for (double a : grid.alphas)
        if (!(a >= 0 && a <= 1))
            fail("alphas", "values must be in [0,1]");
    for (double d : grid.deltas)
        if (!(d >= 0 && d <= 1))
            fail("deltas", "values must be in [0,1]");
    for (double e : grid.eips)
        if (!(e >= 0 && e <= 1))
            fail("eips", "values must be in [0,1]");
    for (double t : grid.lts)
        if (!(t >= 0 && t <= 1))
            fail("lts", "values must be in [0,1]");
    if (!(grid.sgl >= 0 && grid.sgl <= 1))
        fail("sgl", "must be in [0,1]");
}

/// The grid cells in the fixed enumeration order alpha, delta, eip, eit, lt
/// (rightmost fastest). Seeds are left at 0; per-run seeds are derived from
/// (base_seed, cell index, replicate) at execution time.
inline std::vector<SpreadParams> enumerate_cells(const GridSpec& grid)
{
    validate(grid);
    std::vector<SpreadParams> cells;
    cells.reserve(grid.alphas.size() * grid.deltas.size() * grid.eips.size() * grid.eits.size() * grid.lts.size());
    for (double alpha : grid.alphas)
        for (double delta : grid.deltas)
            for (double eip : grid.eips)
                for (std::uint32_t eit : grid.eits)
                    for (double lt : grid.lts) {
                        SpreadParams p;
                        p.sgl = grid.sgl;
                        p.alpha = alpha;
                        p.delta = delta;
                        p.eip = eip;
                        p.eit = eit;
                        p.ss = grid.ss;
                        p.lt = lt;
                        p.seed = 0;
                        cells.push_back(p);
                    }
    return cells;
}

/// One simulated (cell, replicate) pair: full parameter echo (seed included)
/// plus the per-step metrics.
struct SimulationRecord {
    std::uint64_t run_id = 0; // cell_index * replicates + replicate
    std::uint64_t cell_index = 0;
    std::uint32_t replicate = 0;
    SpreadParams params;
    std::vector<StepMetrics> steps;
};

namespace detail {

inline std::vector<SimulationRecord> run_sweep_over(const std::vector<const DiffusionWeights*>& weights_by_rep,
                                                    const std::vector<const MultilayerNetwork*>& nets_by_rep,
                                                    const GridSpec& grid, unsigned threads)
{
    const auto cells = enumerate_cells(grid);
    const std::uint64_t reps = grid.replicates;
    const std::uint64_t total = cells.size() * reps;
    std::vector<SimulationRecord> records(total);

    std::atomic<std::uint64_t> cursor{0};
    std::mutex fail_mutex;
    std::string first_failure;

    auto worker = [&] {
        for (std::uint64_t k = cursor.fetch_add(1); k < total; k = cursor.fetch_add(1)) {
            const std::uint64_t cell = k / reps;
            const std::uint32_t rep = static_cast<std::uint32_t>(k % reps);
            try {
                SpreadParams params = cells[cell];
                params.seed = mix_seed(grid.base_seed, cell, rep);
                const std::size_t net_idx = nets_by_rep.size() == 1 ? 0 : rep;
                Trajectory traj = run_simulation(*weights_by_rep[net_idx], *nets_by_rep[net_idx], params);
                SimulationRecord& rec = records[k];
                rec.run_id = k;
                rec.cell_index = cell;
                rec.replicate = rep;
                rec.params = params;
                rec.steps = std::move(traj.steps);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (first_failure.empty())
                    first_failure = "sweep cell " + std::to_string(cell) + " replicate " + std::to_string(rep) +
                                    " failed: " + e.what();
            }
            {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!first_failure.empty())
                    return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (!first_failure.empty())
        throw std::runtime_error(first_failure);
    return records;
}

} // namespace detail

/// Simulates every (cell, replicate) pair of the grid over one shared
/// network. Records are ordered by (cell_index, replicate) and identical for
/// any thread count.
inline std::vector<SimulationRecord> run_sweep(const MultilayerNetwork& net, const GridSpec& grid,
                                               unsigned threads = 1)
{
    const DiffusionWeights weights = DiffusionWeights::build(net);
    return detail::run_sweep_over({&weights}, {&net}, grid, threads);
}

/// Variant that regenerates the network for each replicate index: replicate
/// r of every cell runs on a network seeded from (netcfg.seed, r).
inline std::vector<SimulationRecord> run_sweep_regenerating(const NetworkConfig& netcfg, const GridSpec& grid,
                                                            unsigned threads = 1)
{
    validate(grid);
    std::vector<MultilayerNetwork> nets;
    std::vector<DiffusionWeights> weights;
    nets.reserve(grid.replicates);
    weights.reserve(grid.replicates);
    for (std::uint32_t r = 0; r < grid.replicates; ++r) {
        NetworkConfig cfg = netcfg;
        cfg.seed = mix_seed(netcfg.seed, 0x6E6574u, r); // stream tag for per-replicate networks
        nets.push_back(assemble_network(cfg));
        weights.push_back(DiffusionWeights::build(nets.back()));
    }
    std::vector<const DiffusionWeights*> wp;
    std::vector<const MultilayerNetwork*> np;
    for (std::uint32_t r = 0; r < grid.replicates; ++r) {
        wp.push_back(&weights[r]);
        np.push_back(&nets[r]);
    }
    return detail::run_sweep_over(wp, np, grid, threads);
}

/// Axes a summary can group by.
enum class GridAxis { alpha, delta, eip, eit, lt };

/// One summary group: the group-by key values (in axis order), the number of
/// pooled runs, mean and sample standard deviation of the final-step
/// avg_gl_companies, and its per-step means.
struct AggregateRow {
    std::vector<double> key;
    std::uint64_t count = 0;
    double mean_final = 0.0;
    double std_final = 0.0;
    std::vector<double> mean_per_step;
};

/// Pools runs by the chosen axes (all runs in one group when none are
/// given), weighting every replicate equally. Rows come out sorted by key.
inline std::vector<AggregateRow> aggregate(const std::vector<SimulationRecord>& records,
                                           const std::vector<GridAxis>& group_by = {})
{
    auto key_of = [&](const SpreadParams& p) {
        std::vector<double> key;
        key.reserve(group_by.size());
        for (GridAxis axis : group_by)
            switch (axis) {
            case GridAxis::alpha:
                key.push_back(p.alpha);
                break;
            case GridAxis::delta:
                key.push_back(p.delta);
                break;
            case GridAxis::eip:
                key.push_back(p.eip);
                break;
            case GridAxis::eit:
                key.push_back(static_cast<double>(p.eit));
                break;
            case GridAxis::lt:
                key.push_back(p.lt);
                break;
            }
        return key;
    };

    struct Group {
        std::vector<const SimulationRecord*> members;
    };
    std::map<std::vector<double>, Group> groups;
    for (const auto& rec : records)
        groups[key_of(rec.params)].members.push_back(&rec);

    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        AggregateRow row;
        row.key = key;
        row.count = group.members.size();
        KahanSum final_sum;
        std::size_t n_steps = 0;
        for (const auto* rec : group.members) {
            final_sum.add(rec->steps.back().avg_gl_companies);
            n_steps = std::max(n_steps, rec->steps.size());
        }
        row.mean_final = final_sum.get() / static_cast<double>(row.count);
        if (row.count > 1) {
            KahanSum sq;
            for (const auto* rec : group.members) {
                const double d = rec->steps.back().avg_gl_companies - row.mean_final;
                sq.add(d * d);
            }
            row.std_final = std::sqrt(sq.get() / static_cast<double>(row.count - 1));
        }
        row.mean_per_step.resize(n_steps, 0.0);
        for (std::size_t s = 0; s < n_steps; ++s) {
            KahanSum step_sum;
            for (const auto* rec : group.members)
                step_sum.add(rec->steps[s].avg_gl_companies);
            row.mean_per_step[s] = step_sum.get() / static_cast<double>(row.count);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace greenspread
