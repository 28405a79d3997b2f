#pragma once
// Synthetic populations and the verification harness: exhaustive-enumeration
// unbiasedness/variance oracle and Monte-Carlo comparison of analytic vs
// empirical variance. Monte-Carlo replications run in parallel over
// deterministic per-replication substreams with a fixed reduction order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfy/cluster.hpp"
#include "mfy/design.hpp"
#include "mfy/estimate.hpp"
#include "mfy/frame_model.hpp"

namespace mfy {

struct SynthSpec {
    int grid_w = 40, grid_h = 30; // pixel grid per satellite raster
    int bands = 3;
    int list_psus = 12;      // equal-size first frame
    int list_psu_size = 20;  // units per list psu
    int list_n = 4;          // sampled list psus
    int list_m = 5;          // units per sampled list psu
    std::vector<int> cluster_counts = {6, 10}; // k per satellite frame (ids 2, 3, ...)
    double yield_base = 3000.0;  // kg/ha
    double trend = 800.0;        // spatial trend amplitude
    double yield_noise = 150.0;  // iid noise on unit yields
    double band_noise = 8.0;     // iid noise on band values
    std::uint64_t seed = 20240101;
};

struct SynthResult {
    Population population;
    std::vector<Raster> rasters;      // one per satellite frame
    std::vector<ClusterModel> models;
    DesignSpec design;                // fixed list design + realized satellites
};

// Deterministic given the spec (seed included). Band values are affine in the
// yield field plus noise, so clustering yields spectrally-informative frames.
SynthResult generate_population(const SynthSpec& spec);

struct OracleReport {
    std::string instance;
    std::uint64_t seed = 0;

    double population_mean = 0;
    double expected_estimate = 0; // exact or empirical mean of the estimator
    double relative_error = 0;    // |expected - truth| / |truth|

    double exact_variance = 0;                   // enumeration only
    std::optional<double> analytic_variance;     // population formula; fixed designs only
    std::optional<double> var_est_mean;          // mean of the sample variance estimator
    double var_est_defined_mass = 0;             // probability mass where it is defined
    std::optional<double> analytic_over_exact;
    std::optional<double> var_est_over_exact;

    std::size_t draws = 0; // enumerated outcomes

    // Monte-Carlo only:
    std::optional<double> empirical_variance;
    std::optional<double> sem; // sd/sqrt(R)
    std::optional<std::size_t> replications;
};

// Walks the full sample space, recomputing weights per draw, and compares the
// expected estimate against the population mean and the exact variance
// against the analytic formula and the variance estimator's mean.
OracleReport unbiasedness_oracle(const Population& pop, const DesignSpec& design,
                                 std::size_t cap = 1000000);

// R independent replications of draw -> weights -> estimate.
OracleReport monte_carlo(const Population& pop, const DesignSpec& design,
                         std::size_t replications, std::uint64_t seed);

// Per-replication estimates (exposed for substream-determinism checks);
// parallel over replications, entry r depends only on (seed, r).
std::vector<double> monte_carlo_estimates(const Population& pop, const DesignSpec& design,
                                          std::size_t replications, std::uint64_t seed,
                                          bool parallel = true);

// Bundled desk-scale instances for the oracle battery.
struct DeskInstance {
    std::string name;
    std::string note;
    Population population;
    DesignSpec design;
};

std::vector<std::string> desk_instance_names();
DeskInstance make_desk_instance(const std::string& name);

} // namespace mfy
