// Serial vs OpenMP benchmark for the data-parallel kernels: k-means on a
// synthetic raster and Monte-Carlo replication of the estimator. Also checks
// that both paths produce identical results, which the fixed blocked
// reduction order guarantees.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfy/cluster.hpp"
#include "mfy/rng.hpp"
#include "mfy/simulate.hpp"

using namespace mfy;

namespace {

template <typename F>
double time_it(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

Raster make_raster(int w, int h, int bands, std::uint64_t seed) {
    Raster r;
    r.width = w;
    r.height = h;
    r.bands = bands;
    r.pixels.resize(static_cast<std::size_t>(w) * h * bands);
    Rng rng(seed);
    for (auto& v : r.pixels) v = 100.0 * rng.uniform();
    return r;
}

} // namespace

int main(int argc, char** argv) {
    int size = 512;
    int k = 16;
    std::size_t replications = 20000;
    for (int i = 1; i < argc; ++i) {
        if (std::strncmp(argv[i], "--size=", 7) == 0) size = std::atoi(argv[i] + 7);
        if (std::strncmp(argv[i], "--k=", 4) == 0) k = std::atoi(argv[i] + 4);
        if (std::strncmp(argv[i], "--replications=", 15) == 0) {
            replications = static_cast<std::size_t>(std::atoll(argv[i] + 15));
        }
    }

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both paths run serially\n");
#endif

    // --- k-means ---
    const Raster raster = make_raster(size, size, 3, 99);
    KmeansOptions serial_opt;
    serial_opt.seed = 7;
    serial_opt.max_iter = 25;
    serial_opt.parallel = false;
    KmeansOptions parallel_opt = serial_opt;
    parallel_opt.parallel = true;

    ClusterModel serial_model, parallel_model;
    const double t_serial = time_it([&] { serial_model = kmeans(raster, k, serial_opt); });
    const double t_parallel = time_it([&] { parallel_model = kmeans(raster, k, parallel_opt); });

    const bool same_labels = serial_model.assignment == parallel_model.assignment;
    const bool same_centers = serial_model.centers == parallel_model.centers;
    const bool same_sse = serial_model.sse == parallel_model.sse;
    std::printf("kmeans %dx%dx3, k=%d: serial %.3fs, parallel %.3fs, speedup %.2fx\n", size, size,
                k, t_serial, t_parallel, t_serial / t_parallel);
    std::printf("  bit-identical: labels=%s centers=%s sse=%s\n", same_labels ? "yes" : "NO",
                same_centers ? "yes" : "NO", same_sse ? "yes" : "NO");

    // --- Monte Carlo ---
    SynthSpec spec;
    spec.seed = 31;
    const SynthResult synth = generate_population(spec);
    std::vector<double> est_serial, est_parallel;
    const double t_mc_serial = time_it([&] {
        est_serial = monte_carlo_estimates(synth.population, synth.design, replications, 5, false);
    });
    const double t_mc_parallel = time_it([&] {
        est_parallel = monte_carlo_estimates(synth.population, synth.design, replications, 5, true);
    });
    const bool same_estimates = est_serial == est_parallel;
    std::printf("monte carlo R=%zu: serial %.3fs, parallel %.3fs, speedup %.2fx\n", replications,
                t_mc_serial, t_mc_parallel, t_mc_serial / t_mc_parallel);
    std::printf("  bit-identical: estimates=%s\n", same_estimates ? "yes" : "NO");

    return (same_labels && same_centers && same_sse && same_estimates) ? 0 : 1;
}
