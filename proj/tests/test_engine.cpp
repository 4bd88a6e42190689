#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "greenspread/engine.hpp"
#include "greenspread/netgen.hpp"
#include "greenspread/network.hpp"
#include "greenspread/rng.hpp"

#include "fixtures.hpp"
#include "spreading_oracle.hpp"

using namespace greenspread;

namespace {

// bank 0 sees bank neighbours 1, 2, 3 whose bank-layer degrees are 5, 1, 4,
// reproducing the reference normalization (weights 0.5, 0.1, 0.4); bank 9
// stays isolated
MultilayerNetwork weighting_net()
{
    NetworkConfig cfg;
    cfg.n_banks = 10;
    cfg.n_firms = 10;
    cfg.bank_mean_degree = 1.0;
    EdgeList bank_e = {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {1, 6}, {1, 7}, {3, 4}, {3, 5}, {3, 8}};
    // firm 0 borrows from banks 0 and 1; bank 0 lends to 3 firms, bank 1 to 2
    EdgeList inter_e = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 3}};
    std::vector<double> assets(10, 1.0);
    return MultilayerNetwork::build(cfg, bank_e, {}, inter_e, assets, build_bank_profiles(assets, cfg), {});
}

SpreadParams trace_params()
{
    SpreadParams p;
    p.sgl = 0.0;
    p.alpha = 1.0;
    p.delta = 0.1;
    p.eip = 1.0;
    p.eit = 2;
    p.ss = 10;
    p.lt = 0.05;
    p.seed = 12345;
    return p;
}

oracle::Params to_oracle(const SpreadParams& p)
{
    oracle::Params q;
    q.sgl = p.sgl;
    q.alpha = p.alpha;
    q.delta = p.delta;
    q.eip = p.eip;
    q.lt = p.lt;
    q.eit = p.eit;
    q.ss = p.ss;
    q.seed = p.seed;
    return q;
}

// engine trajectory and oracle history must agree on every node at every
// step, bit for bit
void require_matches_oracle(const MultilayerNetwork& net, const SpreadParams& params)
{
    const Trajectory traj = run_simulation(net, params, /*record_gl=*/true);
    const auto ref = oracle::run(net.n_banks(), net.n_firms(), net.bank_edges, net.firm_edges,
                                 net.interlayer_edges, to_oracle(params));
    REQUIRE(traj.gl_history.size() == ref.size());
    for (std::size_t s = 0; s < ref.size(); ++s) {
        REQUIRE(traj.gl_history[s].size() == ref[s].size());
        for (std::size_t v = 0; v < ref[s].size(); ++v) {
            if (traj.gl_history[s][v] != ref[s][v]) {
                CAPTURE(s, v, traj.gl_history[s][v], ref[s][v]);
                REQUIRE(traj.gl_history[s][v] == ref[s][v]);
            }
        }
    }
}

} // namespace

TEST_CASE("neighbour influence reproduces the degree-weighted normalization")
{
    const auto net = weighting_net();
    std::vector<double> gl(20, 0.0);

    SECTION("unit levels sum the weights to one")
    {
        gl[1] = gl[2] = gl[3] = 1.0;
        const double L = neighbor_influence(net, InfluenceChannel::bank_layer, 0, gl);
        CHECK(std::abs(L - 1.0) < 1e-15);
    }
    SECTION("only the degree-5 neighbour is green")
    {
        gl[1] = 1.0;
        CHECK(neighbor_influence(net, InfluenceChannel::bank_layer, 0, gl) == 0.5);
    }
    SECTION("empty neighbourhood gives zero")
    {
        gl.assign(20, 1.0);
        CHECK(neighbor_influence(net, InfluenceChannel::bank_layer, 9, gl) == 0.0);
        CHECK(neighbor_influence(net, InfluenceChannel::company_layer, 0, gl) == 0.0);
    }
    SECTION("interlayer weights use interlayer degrees")
    {
        // firm 0's lenders: bank 0 (3 loans), bank 1 (2 loans)
        gl[0] = 0.5;
        gl[1] = 1.0;
        const double expected = (3.0 / 5.0) * 0.5 + (2.0 / 5.0) * 1.0;
        CHECK(neighbor_influence(net, InfluenceChannel::firm_interlayer, 0, gl) == expected);
    }
}

TEST_CASE("external influence substep follows the alpha gate and the cap")
{
    const auto net = fixtures::hand_net_3x5();
    SpreadParams p = trace_params();
    Rng rng(1);

    SECTION("alpha = 0 changes nothing")
    {
        p.alpha = 0.0;
        auto st = init_state(net, p, rng);
        auto before = st.gl;
        for (int i = 0; i < 5; ++i)
            external_influence_substep(st, p, rng);
        CHECK(st.gl == before);
    }
    SECTION("increment caps at one")
    {
        p.alpha = 1.0;
        p.delta = 0.1;
        auto st = init_state(net, p, rng);
        st.gl[0] = 0.95;
        external_influence_substep(st, p, rng);
        CHECK(st.gl[0] == 1.0);
    }
    SECTION("three certain substeps accumulate three increments")
    {
        p.alpha = 1.0;
        p.delta = 0.05;
        auto st = init_state(net, p, rng);
        for (int i = 0; i < 3; ++i)
            external_influence_substep(st, p, rng);
        const double expected = (0.05 + 0.05) + 0.05; // left-fold accumulation
        CHECK(st.gl[0] == expected);
        CHECK(std::abs(st.gl[0] - 0.15) < 1e-12);
    }
}

TEST_CASE("diffusion passes return the pending set without mutating state")
{
    const auto net = fixtures::hand_net_3x5();
    SpreadParams p = trace_params();
    Rng rng(1);
    auto st = init_state(net, p, rng);

    SECTION("all-zero state pends nothing")
    {
        const auto pending = diffusion_substeps(st, p, net);
        for (auto c : pending)
            CHECK(c == 0);
    }
    SECTION("threshold one is unreachable")
    {
        p.lt = 1.0;
        st.gl.assign(st.gl.size(), 1.0);
        const auto pending = diffusion_substeps(st, p, net);
        for (auto c : pending)
            CHECK(c == 0);
    }
    SECTION("a node crossing in both its passes pends twice")
    {
        // bank 1: bank neighbours 0, 2 and borrower firm 2
        p.lt = 0.5;
        st.gl[0] = 1.0; // bank 0
        st.gl[2] = 1.0; // bank 2
        st.gl[3 + 2] = 1.0; // firm 2
        const auto before = st.gl;
        const auto pending = diffusion_substeps(st, p, net);
        CHECK(pending[1] == 2);
        CHECK(st.gl == before);
    }
}

TEST_CASE("the hand-traced ten-step table")
{
    // With alpha = eip = 1, eit = 2, delta = 0.1, lt = 0.05 all three banks
    // and all five firms move in lockstep:
    //   banks 0.0 0.2 0.5 0.7 0.9 1.0 ... (influence + both passes, then cap)
    //   firms 0.0 0.1 0.3 0.5 0.7 0.9 1.0 ...
    const auto net = fixtures::hand_net_3x5();
    const SpreadParams p = trace_params();
    const Trajectory traj = run_simulation(net, p, true);

    const double bank_expect[11] = {0.0, 0.2, 0.5, 0.7, 0.9, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const double firm_expect[11] = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.0, 1.0, 1.0, 1.0};
    REQUIRE(traj.gl_history.size() == 11);
    for (std::size_t s = 0; s <= 10; ++s) {
        for (int b = 0; b < 3; ++b)
            CHECK(std::abs(traj.gl_history[s][b] - bank_expect[s]) < 1e-9);
        for (int f = 0; f < 5; ++f)
            CHECK(std::abs(traj.gl_history[s][3 + f] - firm_expect[s]) < 1e-9);
        CHECK(std::abs(traj.steps[s].avg_gl_companies - firm_expect[s]) < 1e-9);
        CHECK(std::abs(traj.steps[s].avg_gl_banks - bank_expect[s]) < 1e-9);
    }
}

TEST_CASE("engine equals the straight-line reference exactly")
{
    const auto net = fixtures::hand_net_3x5();
    for (double alpha : {0.0, 1.0, 0.37}) {
        for (std::uint32_t eit : {0u, 1u, 2u, 7u}) {
            SpreadParams p = trace_params();
            p.alpha = alpha;
            p.eit = eit;
            p.seed = 1000 + eit;
            require_matches_oracle(net, p);
        }
    }
}

TEST_CASE("engine equals the reference on random small networks")
{
    // random <= 10-node networks, random parameters, exact equality
    Rng meta(424242);
    for (int trial = 0; trial < 25; ++trial) {
        NetworkConfig cfg;
        cfg.n_banks = 3;
        cfg.n_firms = 5;
        cfg.lambda_f = 1;
        cfg.bank_mean_degree = 1.0;
        EdgeList bank_e, firm_e, inter_e;
        for (NodeId i = 0; i < 3; ++i)
            for (NodeId j = i + 1; j < 3; ++j)
                if (meta.bernoulli(0.5))
                    bank_e.push_back({i, j});
        for (NodeId i = 0; i < 5; ++i)
            for (NodeId j = i + 1; j < 5; ++j)
                if (meta.bernoulli(0.4))
                    firm_e.push_back({i, j});
        for (NodeId f = 0; f < 5; ++f)
            if (meta.bernoulli(0.8))
                inter_e.push_back({static_cast<NodeId>(meta.uniform_below(3)), f});
        std::vector<double> assets = {1.0, 1.0, 1.0};
        auto net = MultilayerNetwork::build(cfg, bank_e, firm_e, inter_e, assets,
                                            build_bank_profiles(assets, cfg), {});

        SpreadParams p;
        p.sgl = 0.0;
        p.alpha = meta.bernoulli(0.5) ? 1.0 : 0.0;
        p.delta = 0.05 + 0.05 * static_cast<double>(meta.uniform_below(4));
        p.eip = meta.bernoulli(0.5) ? 1.0 : 0.6;
        p.eit = static_cast<std::uint32_t>(meta.uniform_below(6));
        p.ss = 10;
        p.lt = 0.05 * static_cast<double>(1 + meta.uniform_below(5));
        p.seed = meta.next_u64();
        require_matches_oracle(net, p);
    }
}

TEST_CASE("fast path agrees with the reference step loop")
{
    const auto net = assemble_network(fixtures::desk_config(5));
    SpreadParams p;
    p.alpha = 0.5;
    p.delta = 0.1;
    p.eip = 0.7;
    p.eit = 5;
    p.ss = 20;
    p.lt = 0.1;
    p.seed = 99;

    const Trajectory fast = run_simulation(net, p, true);

    Rng rng(p.seed);
    SimulationState st = init_state(net, p, rng);
    REQUIRE(fast.gl_history[0] == st.gl);
    for (std::uint32_t s = 0; s < p.ss; ++s) {
        step(st, p, net, rng);
        REQUIRE(fast.gl_history[s + 1] == st.gl);
    }
}

TEST_CASE("null sources freeze the zero state")
{
    const auto net = fixtures::hand_net_3x5();
    auto all_zero = [&](const SpreadParams& p) {
        const Trajectory traj = run_simulation(net, p, true);
        for (const auto& gl : traj.gl_history)
            for (double g : gl)
                REQUIRE(g == 0.0);
        for (const auto& m : traj.steps) {
            REQUIRE(m.avg_gl_companies == 0.0);
            REQUIRE(m.frac_influenced_banks == 0.0);
        }
    };

    SpreadParams p = trace_params();
    p.eit = 0;
    all_zero(p);

    p = trace_params();
    p.alpha = 0.0;
    all_zero(p);

    p = trace_params();
    p.delta = 0.0;
    all_zero(p);

    p = trace_params();
    p.eip = 0.0;
    all_zero(p);
}

TEST_CASE("an unreachable threshold leaves only influenced banks moving")
{
    const auto net = fixtures::hand_net_3x5();
    SpreadParams p = trace_params();
    p.lt = 1.0;
    p.eit = 5;
    const Trajectory traj = run_simulation(net, p, true);
    for (std::size_t s = 0; s < traj.gl_history.size(); ++s) {
        for (int f = 0; f < 5; ++f)
            REQUIRE(traj.gl_history[s][3 + f] == 0.0);
        for (int b = 0; b < 3; ++b) {
            const double expected = std::min(1.0, 0.1 * static_cast<double>(std::min<std::size_t>(s, 5)));
            REQUIRE(std::abs(traj.gl_history[s][b] - expected) < 1e-12);
        }
    }
}

TEST_CASE("gl stays bounded and monotone per node")
{
    const auto net = assemble_network(fixtures::desk_config(8));
    SpreadParams p;
    p.alpha = 0.3;
    p.delta = 0.1;
    p.eip = 0.5;
    p.eit = 10;
    p.ss = 30;
    p.lt = 0.1;
    p.seed = 4;
    const Trajectory traj = run_simulation(net, p, true);
    for (std::size_t s = 0; s + 1 < traj.gl_history.size(); ++s)
        for (std::size_t v = 0; v < traj.gl_history[s].size(); ++v) {
            REQUIRE(traj.gl_history[s][v] >= 0.0);
            REQUIRE(traj.gl_history[s][v] <= 1.0);
            REQUIRE(traj.gl_history[s + 1][v] >= traj.gl_history[s][v]);
        }
}

TEST_CASE("pass order within one iteration cannot matter")
{
    // all four passes read the same frozen gl and write disjoint pending
    // slots; evaluating them in reverse must give the same pending set
    const auto net = fixtures::hand_net_3x5();
    SpreadParams p = trace_params();
    p.lt = 0.15;
    Rng rng(33);
    auto st = init_state(net, p, rng);
    for (auto& g : st.gl)
        g = rng.uniform();

    const auto pending = diffusion_substeps(st, p, net);

    std::vector<std::uint8_t> reversed(st.gl.size(), 0);
    const std::span<const double> gl(st.gl);
    for (NodeId f = 0; f < st.n_firms; ++f)
        if (neighbor_influence(net, InfluenceChannel::firm_interlayer, f, gl) > p.lt)
            ++reversed[st.n_banks + f];
    for (NodeId f = 0; f < st.n_firms; ++f)
        if (neighbor_influence(net, InfluenceChannel::company_layer, f, gl) > p.lt)
            ++reversed[st.n_banks + f];
    for (NodeId b = 0; b < st.n_banks; ++b)
        if (neighbor_influence(net, InfluenceChannel::bank_interlayer, b, gl) > p.lt)
            ++reversed[b];
    for (NodeId b = 0; b < st.n_banks; ++b)
        if (neighbor_influence(net, InfluenceChannel::bank_layer, b, gl) > p.lt)
            ++reversed[b];

    CHECK(pending == reversed);
}

TEST_CASE("initial influenced-bank selection matches the binomial oracle")
{
    NetworkConfig cfg;
    cfg.n_banks = 250;
    cfg.n_firms = 250;
    std::vector<double> assets(250, 1.0);
    const auto net =
        MultilayerNetwork::build(cfg, {}, {}, {}, assets, build_bank_profiles(assets, cfg), {});

    SpreadParams p;
    Rng probe(0);

    p.eip = 1.0;
    CHECK(init_state(net, p, probe).influenced_banks.size() == 250);
    p.eip = 0.0;
    CHECK(init_state(net, p, probe).influenced_banks.empty());

    p.eip = 0.25;
    double total = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(mix_seed(7, s));
        total += static_cast<double>(init_state(net, p, rng).influenced_banks.size());
    }
    // Binomial(250, 0.25): sd = sqrt(250 * 0.25 * 0.75) ~ 6.85
    const double se = std::sqrt(250 * 0.25 * 0.75) / std::sqrt(static_cast<double>(seeds));
    CHECK(std::abs(total / seeds - 62.5) < 3 * se);
}

TEST_CASE("trajectories have ss + 1 snapshots and replay deterministically")
{
    const auto net = fixtures::hand_net_3x5();
    SpreadParams p = trace_params();

    p.ss = 0;
    const Trajectory empty = run_simulation(net, p, true);
    CHECK(empty.steps.size() == 1);
    CHECK(empty.gl_history.size() == 1);

    p.ss = 10;
    p.alpha = 0.37;
    const Trajectory a = run_simulation(net, p, true);
    const Trajectory b = run_simulation(net, p, true);
    REQUIRE(a.gl_history == b.gl_history);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t s = 0; s < a.steps.size(); ++s) {
        REQUIRE(a.steps[s].avg_gl_companies == b.steps[s].avg_gl_companies);
        REQUIRE(a.steps[s].frac_influenced_companies == b.steps[s].frac_influenced_companies);
        REQUIRE(a.steps[s].step == s);
    }
}

TEST_CASE("spread params validation names the offending key")
{
    auto expect_throw = [](SpreadParams p, const std::string& key) {
        try {
            validate(p);
            FAIL("expected a config error for " + key);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
            CHECK(std::string(e.what()).find("[0,1]") != std::string::npos);
        }
    };
    SpreadParams p;
    validate(p); // defaults are valid

    p = SpreadParams{};
    p.alpha = -0.1;
    expect_throw(p, "alpha");
    p = SpreadParams{};
    p.delta = 1.5;
    expect_throw(p, "delta");
    p = SpreadParams{};
    p.eip = 2.0;
    expect_throw(p, "eip");
    p = SpreadParams{};
    p.lt = -1e-9;
    expect_throw(p, "lt");
    p = SpreadParams{};
    p.sgl = 1.001;
    expect_throw(p, "sgl");
}
