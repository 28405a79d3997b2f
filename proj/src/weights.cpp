#include "mfy/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfy/summation.hpp"

namespace mfy {

namespace {

std::uint64_t entry_key(int frame_id, int psu_index, int unit) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(frame_id)) << 48) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(psu_index)) << 24) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(unit));
}

} // namespace

RealizedFrameDesign resolve_frame_design(const Frame& frame, const FrameDesign& design,
                                         const FrameSample* drawn) {
    RealizedFrameDesign rd;
    rd.frame_id = frame.id;
    rd.m.assign(static_cast<std::size_t>(frame.psu_count()), -1);

    if (design.policy == MPolicy::fixed) {
        rd.n = design.n;
        for (int i = 0; i < frame.psu_count(); ++i) rd.m[i] = design.m[i];
    } else {
        if (!drawn) {
            throw std::invalid_argument("frame " + std::to_string(frame.id) +
                                        " has a realized policy but no draw to realize from");
        }
        rd.n = drawn->n();
    }
    if (drawn) {
        // Realized allocation takes precedence where the psu was sampled.
        for (const auto& p : drawn->psus) rd.m[p.psu_index] = p.m();
        if (design.policy == MPolicy::realized) rd.n = drawn->n();
    }
    return rd;
}

double star_probability(const Frame& frame, const RealizedFrameDesign& rd, int psu_index) {
    if (psu_index < 0 || psu_index >= frame.psu_count()) {
        throw std::invalid_argument("psu index " + std::to_string(psu_index) +
                                    " not in frame " + std::to_string(frame.id));
    }
    const int m = rd.m[psu_index];
    if (m < 0) {
        throw std::runtime_error("psu '" + frame.psus[psu_index].id + "' of frame " +
                                 std::to_string(frame.id) +
                                 " has no realized allocation; cannot form its inclusion "
                                 "probability");
    }
    const double f1 = static_cast<double>(rd.n) / frame.psu_count();
    const double f2 = static_cast<double>(m) / frame.psus[psu_index].size();
    return f1 * f2 / static_cast<double>(frame.ssu_total());
}

double WeightTable::weight(int frame_id, int psu_index, int unit) const {
    auto it = lookup_.find(entry_key(frame_id, psu_index, unit));
    if (it == lookup_.end()) {
        throw std::runtime_error("no weight for observation (frame " + std::to_string(frame_id) +
                                 ", psu " + std::to_string(psu_index) + ", unit " +
                                 std::to_string(unit) + ")");
    }
    return entries[static_cast<std::size_t>(it->second)].w;
}

double WeightTable::total() const {
    NeumaierSum s;
    for (const auto& e : entries) s.add(e.w);
    return s.value();
}

void WeightTable::build_lookup() {
    lookup_.clear();
    lookup_.reserve(entries.size());
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        const auto& e = entries[i];
        lookup_[entry_key(e.frame_id, e.psu_index, e.unit)] = i;
    }
}

WeightTable normalize_weights(std::vector<WeightEntry> entries) {
    if (entries.empty()) throw std::invalid_argument("no observations to weight");
    std::sort(entries.begin(), entries.end(), [](const WeightEntry& a, const WeightEntry& b) {
        if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
        if (a.psu_index != b.psu_index) return a.psu_index < b.psu_index;
        return a.unit < b.unit;
    });
    NeumaierSum norm;
    for (auto& e : entries) {
        if (!(e.pi_sum > 0.0) || !std::isfinite(e.pi_sum)) {
            throw std::runtime_error("nonpositive inclusion-probability sum for unit " +
                                     std::to_string(e.unit));
        }
        e.raw = 1.0 / e.pi_sum;
        norm.add(e.raw);
    }
    WeightTable table;
    table.norm = norm.value();
    for (auto& e : entries) e.w = e.raw / table.norm;
    table.entries = std::move(entries);
    table.build_lookup();
    return table;
}

WeightTable compute_weights(const Population& pop, const SampleDraw& draw,
                            const DesignSpec& design, WeightRule rule) {
    std::vector<int> all_frames;
    for (const auto& f : pop.frames) all_frames.push_back(f.id);
    return compute_weights(pop, draw, design, all_frames, rule);
}

WeightTable compute_weights(const Population& pop, const SampleDraw& draw,
                            const DesignSpec& design, std::span<const int> frame_subset,
                            WeightRule rule) {
    std::vector<int> subset(frame_subset.begin(), frame_subset.end());
    std::sort(subset.begin(), subset.end());
    auto in_subset = [&](int id) {
        return std::binary_search(subset.begin(), subset.end(), id);
    };

    // Realized quantities per frame in the subset.
    std::map<int, RealizedFrameDesign> realized;
    for (int id : subset) {
        const Frame& frame = pop.frame(id);
        realized.emplace(id, resolve_frame_design(frame, design.frame(id), draw.find_frame(id)));
    }

    std::vector<WeightEntry> entries;
    for (const auto& fs : draw.frames) {
        if (!in_subset(fs.frame_id)) continue;
        for (const auto& p : fs.psus) {
            for (int unit : p.units) {
                const UnitRecord& u = pop.units.at(static_cast<std::size_t>(unit));
                NeumaierSum pi_sum;
                for (const auto& [member_fid, member_psu] : u.memberships) {
                    if (!in_subset(member_fid)) continue;
                    const Frame& mf = pop.frame(member_fid);
                    double pi = star_probability(mf, realized.at(member_fid), member_psu);
                    if (rule == WeightRule::plain_pi) {
                        pi *= static_cast<double>(mf.ssu_total());
                    }
                    pi_sum.add(pi);
                }
                WeightEntry e;
                e.frame_id = fs.frame_id;
                e.psu_index = p.psu_index;
                e.unit = unit;
                e.pi_sum = pi_sum.value();
                entries.push_back(e);
            }
        }
    }
    return normalize_weights(std::move(entries));
}

} // namespace mfy
