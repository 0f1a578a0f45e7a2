// Times the OpenMP kernels against their serial reference implementations
// and cross-checks the results while at it.

#include <cmath>
#include <cstdio>

#include <omp.h>

#include "causalq/datagen.hpp"
#include "causalq/exact_oracle.hpp"
#include "causalq/sampler.hpp"
#include "causalq/trainer.hpp"

using namespace causalq;

namespace {

struct Row {
    const char* name;
    double serial_s;
    double parallel_s;
    double max_diff;
};

void print_row(const Row& row) {
    std::printf("%-28s %10.3fs %10.3fs %8.2fx   max |diff| = %.3g\n", row.name, row.serial_s,
                row.parallel_s, row.serial_s / row.parallel_s, row.max_diff);
}

Dataset make_instance(int d, int n, std::uint64_t seed) {
    GenConfig config;
    config.num_vars = d;
    config.num_samples = n;
    config.seed = seed;
    Rng graph_rng(derive_seed(seed, "gen/graph"));
    Rng data_rng(derive_seed(seed, "gen/data"));
    const WeightedDag g = er_dag(config, graph_rng);
    return linear_gaussian_sample(g, n, config.noise_std, data_rng);
}

Row bench_dp(int d) {
    const Dataset data = make_instance(d, 200, 1);
    double t0, serial_s, parallel_s;
    LocalScoreCache warm(data);
    // serial first on a cold cache, then parallel on its own cold cache
    LocalScoreCache c1(data);
    t0 = omp_get_wtime();
    const ExactQTable ser = exact_q_dp_serial(c1, {d, 9});
    serial_s = omp_get_wtime() - t0;
    LocalScoreCache c2(data);
    t0 = omp_get_wtime();
    const ExactQTable par = exact_q_dp(c2, {d, 9});
    parallel_s = omp_get_wtime() - t0;

    double diff = 0.0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
        const State s(m, d);
        for (int a : feasible_actions(s))
            diff = std::max(diff, std::abs(ser.log_q(s, a) - par.log_q(s, a)));
    }
    return {"exact DP (cold cache)", serial_s, parallel_s, diff};
}

Row bench_enum(int d) {
    const Dataset data = make_instance(d, 200, 2);
    LocalScoreCache cache(data);
    EnumerationOracle::build(cache, {15, d});  // warm the reward cache

    double t0 = omp_get_wtime();
    const EnumerationOracle ser = EnumerationOracle::build_serial(cache, {15, d});
    const double serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    const EnumerationOracle par = EnumerationOracle::build(cache, {15, d});
    const double parallel_s = omp_get_wtime() - t0;

    double diff = 0.0;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << d); ++m) {
        const State s(m, d);
        diff = std::max(diff, std::abs(ser.log_state_mass(s) - par.log_state_mass(s)));
    }
    return {"ordering enumeration", serial_s, parallel_s, diff};
}

Row bench_sampling(int d, int n) {
    const Dataset data = make_instance(d, 200, 3);
    LocalScoreCache cache(data);
    LayeredQModels models = LayeredQModels::make_tabular(d);

    double t0 = omp_get_wtime();
    const auto ser = sample_best_k_serial(models, cache, n, 20, 0.3, 7);
    const double serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    const auto par = sample_best_k(models, cache, n, 20, 0.3, 7);
    const double parallel_s = omp_get_wtime() - t0;

    double diff = 0.0;
    for (std::size_t i = 0; i < ser.size(); ++i)
        diff = std::max(diff, std::abs(ser[i].log_score - par[i].log_score));
    return {"sample + prune + score", serial_s, parallel_s, diff};
}

Row bench_fit(int d, int batch, int steps) {
    MlpOptions opts;
    opts.seed = 11;
    MlpQModel par(d, opts);
    MlpQModel ser = par;
    ser.set_parallel(false);

    std::vector<State> states;
    std::vector<int> actions;
    std::vector<double> targets;
    Rng rng(5);
    for (int i = 0; i < batch; ++i) {
        const State s(rng() & ((std::uint64_t{1} << (d - 1)) - 1), d);
        states.push_back(s);
        actions.push_back(feasible_actions(s).front());
        targets.push_back(-500.0 + static_cast<double>(i));
    }

    double t0 = omp_get_wtime();
    for (int i = 0; i < steps; ++i) ser.fit_batch(states, actions, targets, 1e-3);
    const double serial_s = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    for (int i = 0; i < steps; ++i) par.fit_batch(states, actions, targets, 1e-3);
    const double parallel_s = omp_get_wtime() - t0;

    const auto ps = ser.parameters();
    const auto pp = par.parameters();
    double diff = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) diff = std::max(diff, std::abs(ps[i] - pp[i]));
    return {"mlp gradient steps", serial_s, parallel_s, diff};
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");
    print_row(bench_dp(12));
    print_row(bench_enum(8));
    print_row(bench_sampling(10, 400));
    print_row(bench_fit(10, 256, 200));
    return 0;
}
