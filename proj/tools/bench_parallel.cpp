// Benchmarks the OpenMP experiment driver against the serial reference and the
// block-parallel Monte Carlo risk kernel against its single-thread run.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdc/harness.hpp"

using namespace fdc;

namespace {

template <typename F>
double time_s(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int threads =
#ifdef _OPENMP
        omp_get_max_threads();
#else
        1;
#endif
    if (argc > 1) threads = std::atoi(argv[1]);

    std::printf("bench: serial reference vs OpenMP (%d threads)\n\n", threads);

    {
        ExperimentSpec spec;
        spec.model_id = 1;
        spec.classifiers = {ClassifierKind::oracle, ClassifierKind::sfqda};
        spec.n_per_class = 100;
        spec.grid_m = 50;
        spec.repetitions = 40;
        spec.test_size = 500;
        spec.seed = 7;
        spec.oracle_draws = 100000;

        ExperimentReport serial_rep, parallel_rep;
        const double t_serial = time_s([&] { serial_rep = run_experiment_serial(spec); });
        spec.threads = threads;
        const double t_parallel = time_s([&] { parallel_rep = run_experiment(spec); });
        const bool identical = serial_rep.summary_csv() == parallel_rep.summary_csv() &&
                               serial_rep.reps_csv() == parallel_rep.reps_csv();
        std::printf("experiment (model 1, 40 reps, CV-selected J):\n");
        std::printf("  serial   %8.3f s\n", t_serial);
        std::printf("  parallel %8.3f s   speedup %.2fx   results identical: %s\n\n", t_parallel,
                    t_serial / t_parallel, identical ? "yes" : "NO");
    }

    {
        const BayesRule rule = BayesRule::full(
            effective_population(model_preset(1), ScoreScale::stddev));
        RiskEstimate serial_est, parallel_est;
        const double t_serial =
            time_s([&] { serial_est = mc_bayes_risk(rule, 4000000, RngStream(11), 1); });
        const double t_parallel =
            time_s([&] { parallel_est = mc_bayes_risk(rule, 4000000, RngStream(11), threads); });
        std::printf("mc_bayes_risk (4M draws):\n");
        std::printf("  serial   %8.3f s\n", t_serial);
        std::printf("  parallel %8.3f s   speedup %.2fx   results identical: %s\n", t_parallel,
                    t_serial / t_parallel,
                    serial_est.risk == parallel_est.risk ? "yes" : "NO");
    }
    return 0;
}
