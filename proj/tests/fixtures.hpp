#pragma once

// Hand-built networks shared by the engine tests and the acceptance suite.

#include <cstdint>

#include "greenspread/netgen.hpp"
#include "greenspread/network.hpp"

namespace fixtures {

// 3 banks in a path, 5 firms in a near-cycle, every firm with one lender:
//   bank edges      (0,1); (1,2)
//   firm edges      (0,1); (1,2); (2,3); (3,4); (0,2)
//   interlayer      bank0 -> firms {0,1}; bank1 -> firm {2}; bank2 -> firms {3,4}
// Small enough to trace by hand, rich enough to exercise weighting,
// stacking, and the cap.
inline greenspread::MultilayerNetwork hand_net_3x5()
{
    using namespace greenspread;
    NetworkConfig cfg;
    cfg.n_banks = 3;
    cfg.n_firms = 5;
    cfg.lambda_f = 1;
    cfg.bank_mean_degree = 2.0;
    cfg.ba_m = 1;
    EdgeList bank_e = {{0, 1}, {1, 2}};
    EdgeList firm_e = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}};
    EdgeList inter_e = {{0, 0}, {0, 1}, {1, 2}, {2, 3}, {2, 4}};
    std::vector<double> assets = {1.0, 1.0, 1.0};
    return MultilayerNetwork::build(cfg, bank_e, firm_e, inter_e, assets,
                                    build_bank_profiles(assets, cfg), {0.1, 0.1, 0.1, 0.1, 0.1});
}

inline greenspread::NetworkConfig desk_config(std::uint64_t seed)
{
    greenspread::NetworkConfig cfg;
    cfg.n_banks = 25;
    cfg.n_firms = 1000;
    cfg.seed = seed;
    return cfg;
}

} // namespace fixtures
