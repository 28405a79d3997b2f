#pragma once
// Two-stage srswor sampling design per frame: inclusion probabilities,
// reproducible draws, shared-sample imposition, and exhaustive sample-space
// enumeration for the desk-scale oracles.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mfy/frame_model.hpp"

namespace mfy {

enum class MPolicy {
    fixed,    // m_i prescribed per psu
    realized, // allocation induced by an externally shared sample
};

struct FrameDesign {
    int frame_id = 0;
    MPolicy policy = MPolicy::fixed;
    int n = 0;          // first-stage sample size (fixed policy)
    std::vector<int> m; // per-psu second-stage sizes, aligned with Frame::psus
};

struct DesignSpec {
    std::vector<FrameDesign> frames; // sorted by frame_id
    std::uint64_t seed = 0;

    const FrameDesign& frame(int id) const;
    const FrameDesign* find_frame(int id) const;
    bool all_fixed() const;
    // Frame id of the single fixed frame when all others are realized;
    // -1 when the design is not of that shape.
    int shared_source() const;
};

void validate_design(const Population& pop, const DesignSpec& design);

// Eq-style inclusion probability (n/N)(m_i/M_i) under a fixed design.
double inclusion_probability(const Frame& frame, int psu_index, const FrameDesign& design);

struct SampledPsu {
    int psu_index = -1;
    std::vector<int> units; // sorted unit indices
    int m() const { return static_cast<int>(units.size()); }
};

struct FrameSample {
    int frame_id = 0;
    std::vector<SampledPsu> psus; // sorted by psu_index

    int n() const { return static_cast<int>(psus.size()); }
    double mbar() const; // (1/n) sum m_i
    int total_units() const;
};

struct SampleDraw {
    std::vector<FrameSample> frames; // sorted by frame_id

    const FrameSample& frame(int id) const;
    const FrameSample* find_frame(int id) const;
    std::vector<int> distinct_units() const; // sorted, deduplicated
};

// Independent two-stage srswor draw in every frame. All frames must carry a
// fixed policy. Identical (population, design, seed) triples give identical
// draws; per-frame/per-stage substreams make the result independent of frame
// order.
SampleDraw draw_sample(const Population& pop, const DesignSpec& design);
SampleDraw draw_sample(const Population& pop, const DesignSpec& design, std::uint64_t seed);

// Realized allocation of an externally chosen unit set within one frame:
// selected psus are those containing at least one shared unit, m_i the count
// it holds there.
FrameSample impose_frame(const Population& pop, const Frame& frame,
                         std::span<const int> shared_units);

// The shared sample imposed on every frame of the population.
SampleDraw impose_shared_sample(const Population& pop, std::span<const int> shared_units);

// Draw under either design shape: all-fixed -> independent frame draws;
// one fixed source + realized satellites -> draw the source two-stage and
// impose the drawn units everywhere.
SampleDraw draw_joint(const Population& pop, const DesignSpec& design, std::uint64_t seed);

// Number of distinct outcomes of draw_joint's sample space.
// Throws when it exceeds `cap`.
std::size_t sample_space_size(const Population& pop, const DesignSpec& design,
                              std::size_t cap = 1000000);

// Visits every outcome exactly once with its selection probability;
// probabilities sum to 1 within 1e-12.
void enumerate_samples(const Population& pop, const DesignSpec& design,
                       const std::function<void(const SampleDraw&, double)>& visit,
                       std::size_t cap = 1000000);

} // namespace mfy
