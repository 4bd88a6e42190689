#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace greenspread {

/// Neumaier-compensated accumulator. Keeps sums of 10^4-scale vectors of
/// small reals within one ulp of the exact mean.
class KahanSum {
  public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    double get() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Aggregate observables of one simulation step. Averages are exact
/// arithmetic means over the bank and firm partitions of the state;
/// "influenced" counts nodes with gl strictly above zero.
struct StepMetrics {
    std::uint32_t step = 0;
    double avg_gl_companies = 0.0;
    double avg_gl_banks = 0.0;
    double frac_influenced_companies = 0.0;
    double frac_influenced_banks = 0.0;
};

/// Means and influenced fractions over a gl vector laid out banks-first.
inline StepMetrics compute_step_metrics(std::span<const double> gl, std::uint32_t n_banks, std::uint32_t n_firms,
                                        std::uint32_t step)
{
    StepMetrics m;
    m.step = step;
    KahanSum bank_sum, firm_sum;
    std::uint32_t banks_on = 0, firms_on = 0;
    for (std::uint32_t i = 0; i < n_banks; ++i) {
        bank_sum.add(gl[i]);
        if (gl[i] > 0.0)
            ++banks_on;
    }
    for (std::uint32_t j = 0; j < n_firms; ++j) {
        const double g = gl[n_banks + j];
        firm_sum.add(g);
        if (g > 0.0)
            ++firms_on;
    }
    m.avg_gl_banks = bank_sum.get() / n_banks;
    m.avg_gl_companies = firm_sum.get() / n_firms;
    m.frac_influenced_banks = static_cast<double>(banks_on) / n_banks;
    m.frac_influenced_companies = static_cast<double>(firms_on) / n_firms;
    return m;
}

} // namespace greenspread
