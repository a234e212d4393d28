// Compares the OpenMP batch runner against the serial reference and checks
// that both produce bit-identical statistics.
#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "srncv/builtin_models.hpp"
#include "srncv/selection.hpp"

using namespace srncv;

int main(int argc, char** argv) {
    const std::string name = argc > 1 ? argv[1] : "dimerization";
    const int64_t n = argc > 2 ? std::atoll(argv[2]) : 20000;
    const double horizon = argc > 3 ? std::atof(argv[3]) : 2.0;

    const Model model = builtin_model(name);
    const CompiledModel cm(model);
    const TargetQuery query = TargetQuery::mean(0, horizon);

    // a representative accumulator load: first-order constraints at a few weights
    std::vector<ConstraintExpansion> expansions;
    for (double lambda : {0.0, 0.8, 2.5}) {
        for (size_t s = 0; s < model.n_species(); ++s) {
            MultiIndex m(model.n_species(), 0);
            m[s] = 1;
            expansions.push_back(constraint_expansion(model, {m, lambda}, horizon));
        }
    }

    BatchOptions opt;
    opt.n = n;
    opt.seed = 42;

    std::printf("model=%s n=%lld horizon=%g accumulators=%zu\n", name.c_str(),
                static_cast<long long>(n), horizon, accumulator_keys(expansions).size());

    double t0 = omp_get_wtime();
    const BatchResult serial = run_batch_serial(cm, query, expansions, opt);
    const double serial_s = omp_get_wtime() - t0;
    std::printf("serial      : %8.3f s  (%.2f Mevents/s)\n", serial_s,
                static_cast<double>(serial.total_events) / serial_s / 1e6);

    for (int workers : {1, 2, 4}) {
        if (workers > omp_get_max_threads()) continue;
        opt.workers = workers;
        t0 = omp_get_wtime();
        const BatchResult par = run_batch(cm, query, expansions, opt);
        const double par_s = omp_get_wtime() - t0;
        const bool identical = par.stats.mean_v() == serial.stats.mean_v() &&
                               par.stats.count() == serial.stats.count();
        std::printf("omp %d thread: %8.3f s  (%.2f Mevents/s)  speedup %.2fx  %s\n", workers, par_s,
                    static_cast<double>(par.total_events) / par_s / 1e6, serial_s / par_s,
                    identical ? "bit-identical" : "MISMATCH");
        if (!identical) return 1;
    }
    return 0;
}
