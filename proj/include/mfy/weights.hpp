#pragma once
// Multiple-frame design weights. One weight per sampled observation
// (frame, psu, unit): the inverse of the unit's summed scaled inclusion
// probabilities across every frame containing it, normalized so all weights
// sum to exactly 1.

#include <span>
#include <unordered_map>
#include <vector>

#include "mfy/design.hpp"
#include "mfy/frame_model.hpp"

namespace mfy {

enum class WeightRule {
    pi_star,  // pi*(i,j) = (1/M0)(n/N)(m_i/M_i) -- the worked construction
    plain_pi, // pi(i,j)  = (n/N)(m_i/M_i)       -- comparison variant
};

// Per-frame sampling quantities actually in force for a draw: realized n,
// and per-psu m (realized where sampled, design m under fixed policy, -1
// where unknown).
struct RealizedFrameDesign {
    int frame_id = 0;
    int n = 0;
    std::vector<int> m; // aligned with Frame::psus; -1 = unknown
};

RealizedFrameDesign resolve_frame_design(const Frame& frame, const FrameDesign& design,
                                         const FrameSample* drawn);

// pi*(i,j) for one psu of one frame; throws if the psu's m is unknown.
double star_probability(const Frame& frame, const RealizedFrameDesign& rd, int psu_index);

struct WeightEntry {
    int frame_id = 0;
    int psu_index = -1;
    int unit = -1;
    double pi_sum = 0; // sum of pi* (or pi) over frames containing the unit
    double raw = 0;    // 1 / pi_sum
    double w = 0;      // raw / norm
};

struct WeightTable {
    std::vector<WeightEntry> entries; // sorted (frame_id, psu_index, unit)
    double norm = 0;                  // sum of raw

    double weight(int frame_id, int psu_index, int unit) const; // throws if absent
    double total() const;                                       // compensated sum of w
    void build_lookup();

private:
    std::unordered_map<std::uint64_t, int> lookup_;
};

// Inverts pi sums and normalizes. Split out so the normalization contract
// (scaling every pi_sum by a common factor scales raw and leaves w unchanged)
// is testable on its own.
WeightTable normalize_weights(std::vector<WeightEntry> entries);

WeightTable compute_weights(const Population& pop, const SampleDraw& draw,
                            const DesignSpec& design, WeightRule rule = WeightRule::pi_star);

// Restricted to a subset of frames: entries of other frames are dropped and
// the pi sums range only over member frames inside the subset.
WeightTable compute_weights(const Population& pop, const SampleDraw& draw,
                            const DesignSpec& design, std::span<const int> frame_subset,
                            WeightRule rule = WeightRule::pi_star);

} // namespace mfy
