// Simulates one stable Levy path on [0,1], prints its largest jumps and the
// jump p-variation, then checks the largest-jump law over a few replicates.

#include <iostream>

#include "shotnoise/shotnoise.hpp"

int main()
{
    using namespace shotnoise;

    const auto kernel = indicator_kernel();
    const auto measure = ControlMeasure::lebesgue();

    SeriesConfig config;
    config.alpha = 1.5;
    config.truncation = TermCount{2000};
    config.grid = 512;
    config.seed = 42;

    const auto path = lepage_sample_path(kernel, measure, config, config.replicate_stream(0));
    std::cout << "X(1) = " << path.value_at(1.0) << '\n';
    std::cout << "largest |jump| = " << max_abs_jump(path.ledger()) << '\n';
    std::cout << "largest jump = " << max_jump(path.ledger()) << '\n';
    std::cout << "V_2 of jumps = " << vp_of_jumps(path.ledger(), 2.0) << '\n';

    std::vector<double> maxima;
    for (std::size_t i = 0; i < 500; ++i) {
        const auto terms = draw_terms(config.replicate_stream(i), measure, TermCount{200}, true);
        const auto coefs = lepage_coefficients(terms, config.alpha, measure.total_mass());
        maxima.push_back(max_abs_jump(kernel_ledger(kernel, coefs, terms.marks)));
    }
    const FrechetLaw law(config.alpha, scale_abs_jump(kernel, measure, config.alpha).value);
    std::cout << "KS vs Frechet = "
              << ks_one_sample(EmpiricalSample(maxima), [&](double x) { return law.cdf(x); }) << '\n';
}
