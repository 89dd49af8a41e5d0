// Benchmark comparing the threaded kernels against the serial reference
// implementations, reporting wall time and the largest disagreement.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qtmrl/indicators.hpp"
#include "qtmrl/neural_core.hpp"
#include "qtmrl/reference/indicators_ref.hpp"
#include "qtmrl/reference/linalg_ref.hpp"
#include "qtmrl/rng.hpp"

using namespace qtmrl;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

MarketFrame synthetic_frame(std::size_t assets, std::size_t days, std::uint64_t seed) {
    Rng rng(seed);
    MarketFrame frame;
    for (std::size_t i = 0; i < assets; ++i) frame.tickers.push_back("A" + std::to_string(i));
    frame.calendar.resize(days);
    int year = 2015, month = 1, day = 1;
    for (std::size_t t = 0; t < days; ++t) {
        frame.calendar[t] = Date{year, month, day};
        if (++day > 28) {
            day = 1;
            if (++month > 12) {
                month = 1;
                ++year;
            }
        }
    }
    frame.series.resize(assets);
    for (std::size_t i = 0; i < assets; ++i) {
        frame.series[i].ticker = frame.tickers[i];
        double price = 100.0;
        for (std::size_t t = 0; t < days; ++t) {
            price *= std::exp(0.01 * rng.normal());
            Bar bar;
            bar.date = frame.calendar[t];
            bar.open = price * std::exp(0.002 * rng.normal());
            bar.close = price;
            bar.high = std::max(bar.open, bar.close) * (1.0 + 0.003 * rng.uniform());
            bar.low = std::min(bar.open, bar.close) * (1.0 - 0.003 * rng.uniform());
            bar.volume = 1e5 * (0.5 + rng.uniform());
            frame.series[i].bars.push_back(bar);
        }
    }
    return frame;
}

double max_abs_diff(const FeatureFrame& a, const FeatureFrame& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
    }
    return worst;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    // Indicator batch: threaded kernels vs serial direct definitions.
    {
        const MarketFrame frame = synthetic_frame(16, 2000, 7);
        const auto specs = default_indicator_set();

        auto t0 = clock_type::now();
        const FeatureFrame fast = build_feature_matrix(frame, specs);
        const double fast_s = seconds_since(t0);

        t0 = clock_type::now();
        const FeatureFrame slow = reference::build_feature_matrix(frame, specs);
        const double slow_s = seconds_since(t0);

        std::printf("indicator batch  16 assets x 2000 days: kernels %.3fs, reference %.3fs, "
                    "max |diff| %.3e\n",
                    fast_s, slow_s, max_abs_diff(fast, slow));
    }

    // Network forward pass: threaded affine chain vs serial matvec chain.
    {
        Rng rng(11);
        const std::size_t in_dim = 2048;
        MlpParams net = make_mlp({in_dim, 512, 256, 16}, rng);
        std::vector<double> input(in_dim);
        for (double& v : input) v = rng.normal();

        const int reps = 200;
        auto t0 = clock_type::now();
        std::vector<double> out_fast;
        for (int r = 0; r < reps; ++r) out_fast = forward(net, input);
        const double fast_s = seconds_since(t0);

        t0 = clock_type::now();
        std::vector<double> out_slow;
        for (int r = 0; r < reps; ++r) out_slow = reference::mlp_forward(net, input);
        const double slow_s = seconds_since(t0);

        double worst = 0.0;
        for (std::size_t k = 0; k < out_fast.size(); ++k) {
            worst = std::max(worst, std::abs(out_fast[k] - out_slow[k]));
        }
        std::printf("mlp forward      2048-512-256-16 x %d: kernels %.3fs, reference %.3fs, "
                    "max |diff| %.3e\n",
                    reps, fast_s, slow_s, worst);
    }
    return 0;
}
