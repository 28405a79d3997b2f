#pragma once
// Shared builders for the test suites.

#include <string>
#include <vector>

#include "mfy/design.hpp"
#include "mfy/frame_model.hpp"

namespace mfy::testing {

inline UnitRecord unit(const std::string& id, double y) {
    UnitRecord u;
    u.id = id;
    u.yield = y;
    return u;
}

inline UnitRecord bare_unit(const std::string& id) {
    UnitRecord u;
    u.id = id;
    return u;
}

inline FrameDesign fixed(int frame_id, int n, int psus, int m) {
    FrameDesign fd;
    fd.frame_id = frame_id;
    fd.policy = MPolicy::fixed;
    fd.n = n;
    fd.m.assign(static_cast<std::size_t>(psus), m);
    return fd;
}

inline FrameDesign realized(int frame_id) {
    FrameDesign fd;
    fd.frame_id = frame_id;
    fd.policy = MPolicy::realized;
    return fd;
}

// The three-frame desk instance behind fixtures/hand_weights.csv.
inline Population hand_weight_population() {
    std::vector<UnitRecord> units;
    for (int i = 1; i <= 6; ++i) units.push_back(unit("u" + std::to_string(i), 3000.0 + 100.0 * i));
    for (const char* id : {"f1a", "f1b", "f1c", "f2a", "f2b", "f2c", "f3a", "f3b", "f3c", "f3d"}) {
        units.push_back(bare_unit(id));
    }
    FramePartition f1{1,
                      {{"d1", {"u1", "u2", "f1a"}},
                       {"d2", {"u3", "u4", "f1b", "f1c"}},
                       {"d3", {"u5", "u6"}}}};
    FramePartition f2{2,
                      {{"c1", {"u1", "u3", "u5", "f2a"}}, {"c2", {"u2", "u4", "u6", "f2b", "f2c"}}}};
    FramePartition f3{3,
                      {{"e1", {"u1", "u4"}},
                       {"e2", {"u2", "u5", "f3a"}},
                       {"e3", {"u3", "u6", "f3b", "f3c", "f3d"}}}};
    return build_population(std::move(units), {f1, f2, f3});
}

inline DesignSpec all_realized(const Population& pop, std::uint64_t seed = 0) {
    DesignSpec d;
    d.seed = seed;
    for (const auto& f : pop.frames) d.frames.push_back(realized(f.id));
    return d;
}

} // namespace mfy::testing
