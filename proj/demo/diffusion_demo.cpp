// Generates a small network, runs one simulation in a saturating and a
// suppressed regime, and prints both average-greening trajectories.

#include <cstdio>

#include "greenspread/engine.hpp"
#include "greenspread/netgen.hpp"

int main()
{
    using namespace greenspread;

    NetworkConfig netcfg;
    netcfg.n_banks = 25;
    netcfg.n_firms = 1000;
    netcfg.seed = 42;
    const MultilayerNetwork net = assemble_network(netcfg);
    std::printf("network: %u banks, %u firms, %zu bank edges, %zu firm edges, %zu loans\n", net.n_banks(),
                net.n_firms(), net.bank_edges.size(), net.firm_edges.size(), net.interlayer_edges.size());

    SpreadParams eager;
    eager.alpha = 0.1;
    eager.delta = 0.1;
    eager.eip = 1.0;
    eager.eit = 15;
    eager.lt = 0.05;
    eager.ss = 50;
    eager.seed = 7;

    SpreadParams timid = eager;
    timid.alpha = 0.05;
    timid.delta = 0.05;
    timid.lt = 0.25;

    const Trajectory fast = run_simulation(net, eager);
    const Trajectory slow = run_simulation(net, timid);

    std::printf("\n%5s  %-22s  %-22s\n", "step", "avg company gl (lt=.05)", "avg company gl (lt=.25)");
    for (std::size_t s = 0; s < fast.steps.size(); s += 5)
        std::printf("%5u  %-22.4f  %-22.4f\n", fast.steps[s].step, fast.steps[s].avg_gl_companies,
                    slow.steps[s].avg_gl_companies);
    std::printf("\nfinal: %.4f vs %.4f\n", fast.steps.back().avg_gl_companies, slow.steps.back().avg_gl_companies);
    return 0;
}
