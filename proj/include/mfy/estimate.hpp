#pragma once
// Estimators and comparison metrics.
//
// Multiple-frame side: the weighted mean over all sampled observations, its
// analytic variance over a population, and the sample variance estimator,
// all through the z = w*y transform with per-frame between/within mean
// squares. Single-frame side: the conventional two-stage mean and variance,
// evaluable from summary statistics alone. Comparison metrics: relative
// efficiency and percentage deviation against a reference yield.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfy/design.hpp"
#include "mfy/frame_model.hpp"
#include "mfy/weights.hpp"

namespace mfy {

// Finite-population correction form for the within-psu variance terms:
// `derived` uses (1 - f2), the form the variance decomposition yields;
// `printed` uses (1 - f2^2), kept for comparison.
enum class FpcForm { derived, printed };

struct PsuZ {
    int psu_index = -1;
    int m = 0;      // observations entering zbar (sample m_i or population M_i)
    int M = 0;      // psu size
    double f2 = 0;  // m/M in force
    double zbar = 0;
    double s2w = 0; // within mean square of z; 0 for singleton
};

struct FrameZ {
    int frame_id = 0;
    int n = 0; // psus entering the between mean square
    int N = 0;
    double f1 = 0;
    double mbar = 0;
    double zbarbar = 0; // grand mean of z over the frame's observations
    double s2b = 0;     // between-psu mean square of zbar
    std::vector<PsuZ> psus;
};

std::vector<FrameZ> zstats_sample(const Population& pop, const SampleDraw& draw,
                                  const WeightTable& weights);

// Population analogue under an all-fixed design and population-level weights.
std::vector<FrameZ> zstats_population(const Population& pop, const DesignSpec& design,
                                      const WeightTable& pop_weights);

// Weighted mean over every sampled observation (weights must cover exactly
// the draw and sum to 1).
double mf_mean(const Population& pop, const SampleDraw& draw, const WeightTable& weights);

// Sample variance estimator; requires n >= 2 sampled psus in every frame.
double mf_variance_est(const Population& pop, const SampleDraw& draw,
                       const WeightTable& weights, FpcForm fpc = FpcForm::derived);

struct MfEstimate {
    double mean = 0;
    double var_est = 0;
    double se = 0;
};
MfEstimate mf_estimate(const Population& pop, const SampleDraw& draw,
                       const WeightTable& weights, FpcForm fpc = FpcForm::derived);

// Fixed per-unit weights for population-level evaluation: raw = inverse pi
// sum as usual, normalized by the expected per-draw normalizer
// E[sum of sampled raw] (equals the constant per-draw norm on symmetric
// designs). All frames must carry a fixed policy.
WeightTable population_weights(const Population& pop, const DesignSpec& design,
                               WeightRule rule = WeightRule::pi_star);

// Analytic variance of the weighted mean over the population.
double mf_variance_population(const Population& pop, const DesignSpec& design,
                              const WeightTable& pop_weights, FpcForm fpc = FpcForm::derived);

// ---------------------------------------------------------------------------
// Conventional single-frame two-stage estimator, from summary statistics.

struct SfPsuRow {
    double M = 0;    // psu size
    double m = 0;    // sampled ssus
    double ybar = 0; // psu sample mean
    double s2w = 0;  // within mean square
};

struct SfSummary {
    double N = 0;
    double Mbar = 0;
    std::vector<SfPsuRow> psus; // one per sampled psu; n = psus.size()
    double s2b = 0;             // between mean square of sampled psus
};

struct SfEstimate {
    double mean = 0;
    double s2_between = 0;
    std::vector<double> s2_within;
    double var = 0;
    double se = 0;
    bool negative_variance = false; // flagged, never clamped silently
};

double sf_two_stage_mean(const SfSummary& s);
double sf_two_stage_variance(const SfSummary& s);
SfEstimate sf_from_summary(const SfSummary& s);

// Summary statistics of one frame's realized sample computed from unit data.
SfSummary summarize_frame_sample(const Population& pop, const Frame& frame,
                                 const FrameSample& sample);

// ---------------------------------------------------------------------------
// Comparison metrics.

// min(se)/se per entry; requires nonempty input, all se > 0.
std::vector<double> relative_efficiency(std::span<const double> se);

// (estimate/reference)*100 - 100; requires reference > 0.
double percentage_deviation(double estimate, double reference);

struct ComparisonRow {
    std::string combination; // frame ids joined by '+'
    std::vector<int> frame_ids;
    double mean = 0;
    double se = 0;
    double re = 0;
    double pd = 0;
    std::string error; // nonempty when this combination failed
    bool ok() const { return error.empty(); }
};

struct ComparisonReport {
    double reference_yield = 0;
    std::vector<ComparisonRow> rows; // all nonempty frame subsets, by (size, lex)
};

// One row per nonempty frame combination: weights restricted to the subset,
// weighted mean, variance-estimator SE, relative efficiency across the
// report's successful rows, percentage deviation against the reference.
// A failing combination is reported in place, the others still computed.
ComparisonReport compare_combinations(const Population& pop, const SampleDraw& draw,
                                      const DesignSpec& design, double reference_yield,
                                      WeightRule rule = WeightRule::pi_star,
                                      FpcForm fpc = FpcForm::derived);

} // namespace mfy
