#include "mfy/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "mfy/rng.hpp"
#include "mfy/summation.hpp"

namespace mfy {

namespace {

constexpr std::uint64_t kStageFirst = 1;
constexpr std::uint64_t kStageSecond = 2;

// Lexicographically next k-combination of {0..n-1}; false when exhausted.
bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

std::string frame_tag(int id) { return "frame " + std::to_string(id); }

} // namespace

const FrameDesign& DesignSpec::frame(int id) const {
    const FrameDesign* f = find_frame(id);
    if (!f) throw std::invalid_argument("design has no entry for " + frame_tag(id));
    return *f;
}

const FrameDesign* DesignSpec::find_frame(int id) const {
    for (const auto& f : frames) {
        if (f.frame_id == id) return &f;
    }
    return nullptr;
}

bool DesignSpec::all_fixed() const {
    for (const auto& f : frames) {
        if (f.policy != MPolicy::fixed) return false;
    }
    return !frames.empty();
}

int DesignSpec::shared_source() const {
    int source = -1;
    for (const auto& f : frames) {
        if (f.policy == MPolicy::fixed) {
            if (source != -1) return -1; // more than one fixed frame
            source = f.frame_id;
        }
    }
    return source;
}

void validate_design(const Population& pop, const DesignSpec& design) {
    if (design.frames.empty()) throw std::invalid_argument("design has no frames");
    for (const auto& frame : pop.frames) {
        if (!design.find_frame(frame.id)) {
            throw std::invalid_argument("design is missing an entry for " + frame_tag(frame.id));
        }
    }
    for (const auto& fd : design.frames) {
        const Frame& frame = pop.frame(fd.frame_id);
        if (fd.policy == MPolicy::realized) continue;
        if (fd.n < 1 || fd.n > frame.psu_count()) {
            throw std::invalid_argument("first-stage sample size n=" + std::to_string(fd.n) +
                                        " out of range for " + frame_tag(fd.frame_id) + " (N=" +
                                        std::to_string(frame.psu_count()) + ")");
        }
        if (static_cast<int>(fd.m.size()) != frame.psu_count()) {
            throw std::invalid_argument("fixed design for " + frame_tag(fd.frame_id) +
                                        " must name an m for each of its " +
                                        std::to_string(frame.psu_count()) + " psus");
        }
        for (int i = 0; i < frame.psu_count(); ++i) {
            const int M = frame.psus[i].size();
            if (fd.m[i] < 1 || fd.m[i] > M) {
                throw std::invalid_argument("second-stage size m=" + std::to_string(fd.m[i]) +
                                            " out of range for psu '" + frame.psus[i].id +
                                            "' of " + frame_tag(fd.frame_id) + " (M=" +
                                            std::to_string(M) + ")");
            }
        }
    }
}

double inclusion_probability(const Frame& frame, int psu_index, const FrameDesign& design) {
    if (design.policy != MPolicy::fixed) {
        throw std::invalid_argument("inclusion probability needs a fixed design for " +
                                    frame_tag(design.frame_id));
    }
    if (psu_index < 0 || psu_index >= frame.psu_count()) {
        throw std::invalid_argument("psu index " + std::to_string(psu_index) + " not in " +
                                    frame_tag(frame.id));
    }
    const double f1 = static_cast<double>(design.n) / frame.psu_count();
    const double f2 =
        static_cast<double>(design.m[psu_index]) / frame.psus[psu_index].size();
    return f1 * f2;
}

double FrameSample::mbar() const {
    if (psus.empty()) return 0.0;
    long long total = 0;
    for (const auto& p : psus) total += p.m();
    return static_cast<double>(total) / static_cast<double>(psus.size());
}

int FrameSample::total_units() const {
    int t = 0;
    for (const auto& p : psus) t += p.m();
    return t;
}

const FrameSample& SampleDraw::frame(int id) const {
    const FrameSample* f = find_frame(id);
    if (!f) throw std::invalid_argument("draw has no sample for " + frame_tag(id));
    return *f;
}

const FrameSample* SampleDraw::find_frame(int id) const {
    for (const auto& f : frames) {
        if (f.frame_id == id) return &f;
    }
    return nullptr;
}

std::vector<int> SampleDraw::distinct_units() const {
    std::vector<int> all;
    for (const auto& f : frames) {
        for (const auto& p : f.psus) {
            all.insert(all.end(), p.units.begin(), p.units.end());
        }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

namespace {

FrameSample draw_frame_fixed(const Frame& frame, const FrameDesign& fd, std::uint64_t seed) {
    FrameSample fs;
    fs.frame_id = frame.id;
    Rng stage1(derive_seed(seed, {static_cast<std::uint64_t>(frame.id), kStageFirst}));
    const std::vector<int> chosen =
        sample_without_replacement(frame.psu_count(), fd.n, stage1);
    for (int psu_index : chosen) {
        const Psu& psu = frame.psus[psu_index];
        Rng stage2(derive_seed(seed, {static_cast<std::uint64_t>(frame.id), kStageSecond,
                                      static_cast<std::uint64_t>(psu_index)}));
        const std::vector<int> picks =
            sample_without_replacement(psu.size(), fd.m[psu_index], stage2);
        SampledPsu sp;
        sp.psu_index = psu_index;
        sp.units.reserve(picks.size());
        for (int k : picks) sp.units.push_back(psu.units[k]);
        fs.psus.push_back(std::move(sp));
    }
    return fs;
}

} // namespace

SampleDraw draw_sample(const Population& pop, const DesignSpec& design) {
    return draw_sample(pop, design, design.seed);
}

SampleDraw draw_sample(const Population& pop, const DesignSpec& design, std::uint64_t seed) {
    validate_design(pop, design);
    if (!design.all_fixed()) {
        throw std::invalid_argument(
            "draw_sample requires a fixed m-policy in every frame; use draw_joint for "
            "shared-sample designs");
    }
    SampleDraw draw;
    for (const auto& frame : pop.frames) {
        draw.frames.push_back(draw_frame_fixed(frame, design.frame(frame.id), seed));
    }
    return draw;
}

FrameSample impose_frame(const Population& pop, const Frame& frame,
                         std::span<const int> shared_units) {
    FrameSample fs;
    fs.frame_id = frame.id;
    std::map<int, std::vector<int>> by_psu;
    for (int unit : shared_units) {
        const UnitRecord& u = pop.units.at(static_cast<std::size_t>(unit));
        auto it = u.memberships.find(frame.id);
        if (it == u.memberships.end()) {
            throw std::invalid_argument("shared unit '" + u.id + "' has no membership in " +
                                        frame_tag(frame.id));
        }
        by_psu[it->second].push_back(unit);
    }
    for (auto& [psu_index, units] : by_psu) {
        std::sort(units.begin(), units.end());
        SampledPsu sp;
        sp.psu_index = psu_index;
        sp.units = std::move(units);
        fs.psus.push_back(std::move(sp));
    }
    return fs;
}

SampleDraw impose_shared_sample(const Population& pop, std::span<const int> shared_units) {
    if (shared_units.empty()) {
        throw std::invalid_argument("shared sample is empty");
    }
    SampleDraw draw;
    for (const auto& frame : pop.frames) {
        draw.frames.push_back(impose_frame(pop, frame, shared_units));
    }
    return draw;
}

SampleDraw draw_joint(const Population& pop, const DesignSpec& design, std::uint64_t seed) {
    validate_design(pop, design);
    if (design.all_fixed()) {
        SampleDraw draw;
        for (const auto& frame : pop.frames) {
            draw.frames.push_back(draw_frame_fixed(frame, design.frame(frame.id), seed));
        }
        return draw;
    }
    const int source = design.shared_source();
    if (source < 0) {
        throw std::invalid_argument(
            "realized frames require exactly one fixed source frame in the design");
    }
    const FrameSample src = draw_frame_fixed(pop.frame(source), design.frame(source), seed);
    std::vector<int> shared;
    for (const auto& p : src.psus) shared.insert(shared.end(), p.units.begin(), p.units.end());
    std::sort(shared.begin(), shared.end());
    return impose_shared_sample(pop, shared);
}

namespace {

double frame_space_size(const Frame& frame, const FrameDesign& fd) {
    // sum over n-subsets S of prod_{i in S} C(M_i, m_i), by DP over psus
    const int N = frame.psu_count();
    std::vector<double> dp(static_cast<std::size_t>(fd.n) + 1, 0.0);
    dp[0] = 1.0;
    for (int i = 0; i < N; ++i) {
        const double ways = binomial(frame.psus[i].size(), fd.m[i]);
        for (int c = std::min(fd.n, i + 1); c >= 1; --c) {
            dp[c] += dp[c - 1] * ways;
        }
    }
    return dp[fd.n];
}

// Enumerates one frame's two-stage draws: every n-subset of psus crossed with
// every m_i-subset of each selected psu's units.
void enumerate_frame(const Frame& frame, const FrameDesign& fd,
                     const std::function<void(const FrameSample&, double)>& visit) {
    const int N = frame.psu_count();
    const double p_first = 1.0 / binomial(N, fd.n);

    std::vector<int> psu_subset(static_cast<std::size_t>(fd.n));
    for (int i = 0; i < fd.n; ++i) psu_subset[i] = i;

    do {
        FrameSample fs;
        fs.frame_id = frame.id;
        fs.psus.resize(psu_subset.size());
        std::vector<std::vector<int>> picks(psu_subset.size());
        double prob = p_first;
        for (std::size_t s = 0; s < psu_subset.size(); ++s) {
            const int psu_index = psu_subset[s];
            fs.psus[s].psu_index = psu_index;
            const int m = fd.m[psu_index];
            picks[s].resize(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) picks[s][i] = i;
            prob /= binomial(frame.psus[psu_index].size(), m);
        }

        // Odometer over the per-psu unit subsets.
        for (;;) {
            for (std::size_t s = 0; s < psu_subset.size(); ++s) {
                const Psu& psu = frame.psus[psu_subset[s]];
                auto& units = fs.psus[s].units;
                units.clear();
                for (int k : picks[s]) units.push_back(psu.units[k]);
            }
            visit(fs, prob);

            std::size_t s = picks.size();
            while (s > 0) {
                --s;
                if (next_combination(picks[s], frame.psus[psu_subset[s]].size())) break;
                for (int i = 0; i < static_cast<int>(picks[s].size()); ++i) picks[s][i] = i;
                if (s == 0) {
                    s = picks.size() + 1; // odometer exhausted
                    break;
                }
            }
            if (s == picks.size() + 1 || picks.empty()) break;
        }
    } while (next_combination(psu_subset, N));
}

} // namespace

std::size_t sample_space_size(const Population& pop, const DesignSpec& design,
                              std::size_t cap) {
    validate_design(pop, design);
    double total = 1.0;
    if (design.all_fixed()) {
        for (const auto& frame : pop.frames) {
            total *= frame_space_size(frame, design.frame(frame.id));
            if (total > static_cast<double>(cap)) break;
        }
    } else {
        const int source = design.shared_source();
        if (source < 0) {
            throw std::invalid_argument(
                "realized frames require exactly one fixed source frame in the design");
        }
        total = frame_space_size(pop.frame(source), design.frame(source));
    }
    if (total > static_cast<double>(cap)) {
        char count[32];
        std::snprintf(count, sizeof(count), "%.0f", total);
        throw std::runtime_error("sample space has about " + std::string(count) +
                                 " draws, above the enumeration cap of " + std::to_string(cap));
    }
    return static_cast<std::size_t>(total + 0.5);
}

void enumerate_samples(const Population& pop, const DesignSpec& design,
                       const std::function<void(const SampleDraw&, double)>& visit,
                       std::size_t cap) {
    (void)sample_space_size(pop, design, cap); // throws when over cap

    if (!design.all_fixed()) {
        const Frame& source = pop.frame(design.shared_source());
        const FrameDesign& fd = design.frame(source.id);
        enumerate_frame(source, fd, [&](const FrameSample& fs, double prob) {
            std::vector<int> shared;
            for (const auto& p : fs.psus) {
                shared.insert(shared.end(), p.units.begin(), p.units.end());
            }
            std::sort(shared.begin(), shared.end());
            visit(impose_shared_sample(pop, shared), prob);
        });
        return;
    }

    // Product over frames: recursive composition of per-frame enumerations.
    SampleDraw current;
    current.frames.resize(pop.frames.size());
    std::function<void(std::size_t, double)> rec = [&](std::size_t fi, double prob) {
        if (fi == pop.frames.size()) {
            visit(current, prob);
            return;
        }
        const Frame& frame = pop.frames[fi];
        enumerate_frame(frame, design.frame(frame.id), [&](const FrameSample& fs, double p) {
            current.frames[fi] = fs;
            rec(fi + 1, prob * p);
        });
    };
    rec(0, 1.0);
}

} // namespace mfy
