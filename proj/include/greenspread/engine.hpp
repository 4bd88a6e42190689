#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "greenspread/errors.hpp"
#include "greenspread/metrics.hpp"
#include "greenspread/network.hpp"
#include "greenspread/rng.hpp"

namespace greenspread {

/// Knobs of one spreading run.
///
/// Each step while step < eit, every influenced bank gets one Bernoulli(alpha)
/// chance of gaining delta. Diffusion then runs four threshold passes against
/// the frozen post-influence gl vector: banks via the bank layer, banks via
/// the interlayer, firms via the company layer, firms via the interlayer.
/// A node whose weighted neighbour level exceeds lt (strictly) in a pass
/// pends one delta; pending increments stack and apply capped at 1.
struct SpreadParams {
    double sgl = 0.0;        // starting greening level of every node
    double alpha = 0.1;      // per-step success probability of external influence
    double delta = 0.1;      // greening-level increment
    double eip = 1.0;        // probability a bank is selected for external influence
    std::uint32_t eit = 15;  // steps during which external influence acts
    std::uint32_t ss = 100;  // simulation steps
    double lt = 0.05;        // linear threshold on neighbour influence
    std::uint64_t seed = 0;
};

inline void validate(const SpreadParams& p)
{
    auto fail = [](const char* key) {
        throw ConfigError(std::string("spread params: \"") + key + "\" must be in [0,1]");
    };
    if (!(p.sgl >= 0 && p.sgl <= 1))
        fail("sgl");
    if (!(p.alpha >= 0 && p.alpha <= 1))
        fail("alpha");
    if (!(p.delta >= 0 && p.delta <= 1))
        fail("delta");
    if (!(p.eip >= 0 && p.eip <= 1))
        fail("eip");
    if (!(p.lt >= 0 && p.lt <= 1))
        fail("lt");
}

/// Which neighbourhood a threshold pass reads. Weights always use degrees
/// from the same edge set, so they sum to 1 over the neighbourhood.
enum class InfluenceChannel {
    bank_layer,      // bank <- its bank neighbours
    bank_interlayer, // bank <- its firm counterparties
    company_layer,   // firm <- its firm neighbours
    firm_interlayer, // firm <- its bank lenders
};

/// Mutable part of a running simulation. gl is laid out banks first, then
/// firms. influenced_banks is drawn once at init and never changes.
struct SimulationState {
    std::vector<double> gl;
    std::vector<NodeId> influenced_banks; // ascending
    std::uint32_t n_banks = 0;
    std::uint32_t n_firms = 0;
    std::uint32_t step = 0;
};

/// Per-step aggregate metrics plus, optionally, full gl snapshots.
/// steps[0] describes the freshly initialized state.
struct Trajectory {
    SpreadParams params;
    std::vector<StepMetrics> steps;
    std::vector<std::vector<double>> gl_history; // empty unless recording was requested
};

/// One Bernoulli(eip) draw per bank, ascending id, from a stream seeded with
/// params.seed. The same stream then drives the per-step influence draws.
inline SimulationState init_state(const MultilayerNetwork& net, const SpreadParams& params, Rng& rng)
{
    SimulationState st;
    st.n_banks = net.n_banks();
    st.n_firms = net.n_firms();
    st.gl.assign(net.n_nodes(), params.sgl);
    for (NodeId b = 0; b < st.n_banks; ++b)
        if (rng.bernoulli(params.eip))
            st.influenced_banks.push_back(b);
    st.step = 0;
    return st;
}

/// Weighted neighbour level of node v through one channel: the sum over
/// neighbours j of (deg_j / total_deg) * gl_j, degrees taken within the
/// channel's edge set, terms accumulated in ascending neighbour id.
/// Returns 0 for an empty neighbourhood.
inline double neighbor_influence(const MultilayerNetwork& net, InfluenceChannel channel, NodeId v,
                                 std::span<const double> gl)
{
    const std::vector<NodeId>* nbrs = nullptr;
    const std::vector<std::vector<NodeId>>* deg_of = nullptr;
    std::size_t gl_base = 0;
    switch (channel) {
    case InfluenceChannel::bank_layer:
        nbrs = &net.bank_adj[v];
        deg_of = &net.bank_adj;
        gl_base = 0;
        break;
    case InfluenceChannel::bank_interlayer:
        nbrs = &net.bank_firms[v];
        deg_of = &net.firm_banks;
        gl_base = net.n_banks();
        break;
    case InfluenceChannel::company_layer:
        nbrs = &net.firm_adj[v];
        deg_of = &net.firm_adj;
        gl_base = net.n_banks();
        break;
    case InfluenceChannel::firm_interlayer:
        nbrs = &net.firm_banks[v];
        deg_of = &net.bank_firms;
        gl_base = 0;
        break;
    }
    if (nbrs->empty())
        return 0.0;
    std::uint64_t total = 0;
    for (NodeId j : *nbrs)
        total += (*deg_of)[j].size();
    double acc = 0.0;
    for (NodeId j : *nbrs)
        acc += (static_cast<double>((*deg_of)[j].size()) / static_cast<double>(total)) * gl[gl_base + j];
    return acc;
}

/// One Bernoulli(alpha) draw per influenced bank, ascending, applied
/// immediately with the cap. The caller gates this on step < eit.
inline void external_influence_substep(SimulationState& st, const SpreadParams& params, Rng& rng)
{
    for (NodeId b : st.influenced_banks)
        if (rng.bernoulli(params.alpha))
            st.gl[b] = std::min(1.0, st.gl[b] + params.delta);
}

/// The four diffusion passes, all evaluated against the gl vector as given
/// (frozen post-influence base). Returns per-node pending increment counts;
/// gl is not touched. A node crossing the threshold through both of its
/// channels pends twice.
inline std::vector<std::uint8_t> diffusion_substeps(const SimulationState& st, const SpreadParams& params,
                                                    const MultilayerNetwork& net)
{
    std::vector<std::uint8_t> pending(st.gl.size(), 0);
    const std::span<const double> gl(st.gl);
    for (NodeId b = 0; b < st.n_banks; ++b)
        if (neighbor_influence(net, InfluenceChannel::bank_layer, b, gl) > params.lt)
            ++pending[b];
    for (NodeId b = 0; b < st.n_banks; ++b)
        if (neighbor_influence(net, InfluenceChannel::bank_interlayer, b, gl) > params.lt)
            ++pending[b];
    for (NodeId f = 0; f < st.n_firms; ++f)
        if (neighbor_influence(net, InfluenceChannel::company_layer, f, gl) > params.lt)
            ++pending[st.n_banks + f];
    for (NodeId f = 0; f < st.n_firms; ++f)
        if (neighbor_influence(net, InfluenceChannel::firm_interlayer, f, gl) > params.lt)
            ++pending[st.n_banks + f];
    return pending;
}

/// Applies pending increments: gl = min(1, gl + count * delta), ascending
/// node id. Shared by the reference step and the fast path so the arithmetic
/// is identical.
inline bool apply_pending(std::vector<double>& gl, std::span<const std::uint8_t> pending, double delta)
{
    bool changed = false;
    for (std::size_t v = 0; v < gl.size(); ++v)
        if (pending[v] > 0) {
            const double next = std::min(1.0, gl[v] + static_cast<double>(pending[v]) * delta);
            if (next != gl[v]) {
                gl[v] = next;
                changed = true;
            }
        }
    return changed;
}

/// One full iteration in the reference formulation: external influence while
/// step < eit, the four frozen-base passes, then the capped apply.
inline void step(SimulationState& st, const SpreadParams& params, const MultilayerNetwork& net, Rng& rng)
{
    if (st.step < params.eit)
        external_influence_substep(st, params, rng);
    const auto pending = diffusion_substeps(st, params, net);
    apply_pending(st.gl, pending, params.delta);
    ++st.step;
}

/// Flattened per-channel neighbour weights: for each target node, its
/// neighbours' gl indices and normalized weights, concatenated in ascending
/// target then neighbour order. Built once per network and shared read-only
/// by any number of concurrent simulations.
struct DiffusionWeights {
    struct Entry {
        std::uint32_t gl_index;
        double weight;
    };
    // channel-major: bank_layer, bank_interlayer, company_layer, firm_interlayer
    std::array<std::vector<std::size_t>, 4> offsets; // per channel, size = targets + 1
    std::array<std::vector<Entry>, 4> entries;
    std::uint32_t n_banks = 0;
    std::uint32_t n_firms = 0;

    static DiffusionWeights build(const MultilayerNetwork& net)
    {
        DiffusionWeights w;
        w.n_banks = net.n_banks();
        w.n_firms = net.n_firms();
        auto fill = [](std::vector<std::size_t>& offs, std::vector<Entry>& ents,
                       const std::vector<std::vector<NodeId>>& adj, const std::vector<std::vector<NodeId>>& deg_of,
                       std::size_t gl_base) {
            offs.assign(adj.size() + 1, 0);
            std::size_t count = 0;
            for (const auto& nbrs : adj)
                count += nbrs.size();
            ents.reserve(count);
            for (std::size_t v = 0; v < adj.size(); ++v) {
                std::uint64_t total = 0;
                for (NodeId j : adj[v])
                    total += deg_of[j].size();
                for (NodeId j : adj[v])
                    ents.push_back({static_cast<std::uint32_t>(gl_base + j),
                                    static_cast<double>(deg_of[j].size()) / static_cast<double>(total)});
                offs[v + 1] = ents.size();
            }
        };
        fill(w.offsets[0], w.entries[0], net.bank_adj, net.bank_adj, 0);
        fill(w.offsets[1], w.entries[1], net.bank_firms, net.firm_banks, net.n_banks());
        fill(w.offsets[2], w.entries[2], net.firm_adj, net.firm_adj, net.n_banks());
        fill(w.offsets[3], w.entries[3], net.firm_banks, net.bank_firms, 0);
        return w;
    }
};

namespace detail {

/// Fast-path iteration over precomputed weights. Arithmetic is identical to
/// the reference step; targets already at gl = 1 are skipped because no
/// increment can change them. Returns whether any gl changed.
inline bool step_fast(SimulationState& st, const SpreadParams& params, const DiffusionWeights& w, Rng& rng,
                      std::vector<std::uint8_t>& pending)
{
    bool changed = false;
    if (st.step < params.eit)
        for (NodeId b : st.influenced_banks)
            if (rng.bernoulli(params.alpha)) {
                const double next = std::min(1.0, st.gl[b] + params.delta);
                if (next != st.gl[b]) {
                    st.gl[b] = next;
                    changed = true;
                }
            }

    pending.assign(st.gl.size(), 0);
    for (int ch = 0; ch < 4; ++ch) {
        const std::size_t base = (ch == 0 || ch == 1) ? 0 : st.n_banks;
        const std::size_t n_targets = w.offsets[ch].size() - 1;
        for (std::size_t v = 0; v < n_targets; ++v) {
            if (st.gl[base + v] >= 1.0)
                continue;
            const std::size_t lo = w.offsets[ch][v], hi = w.offsets[ch][v + 1];
            if (lo == hi)
                continue;
            double acc = 0.0;
            for (std::size_t k = lo; k < hi; ++k)
                acc += w.entries[ch][k].weight * st.gl[w.entries[ch][k].gl_index];
            if (acc > params.lt)
                ++pending[base + v];
        }
    }
    if (apply_pending(st.gl, pending, params.delta))
        changed = true;
    ++st.step;
    return changed;
}

} // namespace detail

/// Runs init plus ss steps over prebuilt weights, recording metrics after
/// initialization and after every step. Once no gl changed in a step and
/// external influence is over, the state is a fixed point and remaining
/// steps are emitted without re-simulation.
inline Trajectory run_simulation(const DiffusionWeights& w, const MultilayerNetwork& net, const SpreadParams& params,
                                 bool record_gl = false)
{
    validate(params);
    Rng rng(params.seed);
    SimulationState st = init_state(net, params, rng);

    Trajectory traj;
    traj.params = params;
    traj.steps.reserve(params.ss + 1);
    traj.steps.push_back(compute_step_metrics(st.gl, st.n_banks, st.n_firms, 0));
    if (record_gl)
        traj.gl_history.push_back(st.gl);

    std::vector<std::uint8_t> pending;
    bool fixed_point = false;
    for (std::uint32_t s = 0; s < params.ss; ++s) {
        if (!fixed_point) {
            const bool changed = detail::step_fast(st, params, w, rng, pending);
            fixed_point = !changed && st.step >= params.eit;
            traj.steps.push_back(compute_step_metrics(st.gl, st.n_banks, st.n_firms, st.step));
        } else {
            ++st.step;
            StepMetrics m = traj.steps.back();
            m.step = st.step;
            traj.steps.push_back(m);
        }
        if (record_gl)
            traj.gl_history.push_back(st.gl);
    }
    return traj;
}

inline Trajectory run_simulation(const MultilayerNetwork& net, const SpreadParams& params, bool record_gl = false)
{
    return run_simulation(DiffusionWeights::build(net), net, params, record_gl);
}

} // namespace greenspread
