#include "mfy/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfy/summation.hpp"

namespace mfy {

namespace {

double fpc_within(double f2, FpcForm form) {
    return form == FpcForm::derived ? (1.0 - f2) : (1.0 - f2 * f2);
}

std::vector<int> table_frame_ids(const WeightTable& weights) {
    std::vector<int> ids;
    for (const auto& e : weights.entries) {
        if (ids.empty() || ids.back() != e.frame_id) ids.push_back(e.frame_id);
    }
    return ids; // entries are sorted by frame id
}

void check_coverage(const SampleDraw& draw, const WeightTable& weights,
                    const std::vector<int>& frame_ids) {
    std::size_t observations = 0;
    for (int id : frame_ids) {
        const FrameSample& fs = draw.frame(id);
        for (const auto& p : fs.psus) observations += p.units.size();
    }
    if (observations != weights.entries.size()) {
        throw std::runtime_error("weight table does not cover the draw: " +
                                 std::to_string(weights.entries.size()) + " weights for " +
                                 std::to_string(observations) + " observations");
    }
}

// Between/within z statistics for one frame's observation set.
FrameZ frame_z(const Frame& frame, int n_in_force,
               const std::vector<PsuZ>& psus, double mbar) {
    FrameZ fz;
    fz.frame_id = frame.id;
    fz.n = n_in_force;
    fz.N = frame.psu_count();
    fz.f1 = static_cast<double>(n_in_force) / frame.psu_count();
    fz.mbar = mbar;
    fz.psus = psus;

    // Grand mean over the frame's observations: sum(m_i zbar_i) / sum(m_i).
    NeumaierSum zsum;
    long long mtotal = 0;
    for (const auto& p : psus) {
        zsum.add(static_cast<double>(p.m) * p.zbar);
        mtotal += p.m;
    }
    fz.zbarbar = zsum.value() / static_cast<double>(mtotal);

    if (psus.size() >= 2) {
        NeumaierSum dev;
        for (const auto& p : psus) {
            const double d = p.zbar - fz.zbarbar;
            dev.add(d * d);
        }
        fz.s2b = dev.value() / static_cast<double>(psus.size() - 1);
    } else {
        fz.s2b = 0.0;
    }
    return fz;
}

} // namespace

std::vector<FrameZ> zstats_sample(const Population& pop, const SampleDraw& draw,
                                  const WeightTable& weights) {
    std::vector<FrameZ> out;
    for (int id : table_frame_ids(weights)) {
        const Frame& frame = pop.frame(id);
        const FrameSample& fs = draw.frame(id);
        std::vector<PsuZ> psus;
        psus.reserve(fs.psus.size());
        for (const auto& p : fs.psus) {
            PsuZ pz;
            pz.psu_index = p.psu_index;
            pz.m = p.m();
            pz.M = frame.psus[p.psu_index].size();
            pz.f2 = static_cast<double>(pz.m) / pz.M;

            NeumaierSum zsum;
            std::vector<double> zs;
            zs.reserve(p.units.size());
            for (int unit : p.units) {
                const double z =
                    weights.weight(id, p.psu_index, unit) * pop.unit_yield(unit);
                zs.push_back(z);
                zsum.add(z);
            }
            pz.zbar = zsum.value() / static_cast<double>(pz.m);
            if (pz.m >= 2) {
                NeumaierSum dev;
                for (double z : zs) dev.add((z - pz.zbar) * (z - pz.zbar));
                pz.s2w = dev.value() / static_cast<double>(pz.m - 1);
            } else {
                pz.s2w = 0.0; // singleton psu sample
            }
            psus.push_back(std::move(pz));
        }
        out.push_back(frame_z(frame, fs.n(), psus, fs.mbar()));
    }
    return out;
}

std::vector<FrameZ> zstats_population(const Population& pop, const DesignSpec& design,
                                      const WeightTable& pop_weights) {
    validate_design(pop, design);
    std::vector<FrameZ> out;
    for (const auto& frame : pop.frames) {
        const FrameDesign& fd = design.frame(frame.id);
        if (fd.policy != MPolicy::fixed) {
            throw std::invalid_argument("population z statistics need a fixed design for frame " +
                                        std::to_string(frame.id));
        }
        std::vector<PsuZ> psus;
        psus.reserve(frame.psus.size());
        long long m_total = 0;
        for (int i = 0; i < frame.psu_count(); ++i) {
            const Psu& psu = frame.psus[i];
            PsuZ pz;
            pz.psu_index = i;
            pz.m = psu.size(); // all M_i units enter the population zbar
            pz.M = psu.size();
            pz.f2 = static_cast<double>(fd.m[i]) / psu.size();
            m_total += fd.m[i];

            NeumaierSum zsum;
            std::vector<double> zs;
            zs.reserve(psu.units.size());
            for (int unit : psu.units) {
                const double z =
                    pop_weights.weight(frame.id, i, unit) * pop.unit_yield(unit);
                zs.push_back(z);
                zsum.add(z);
            }
            pz.zbar = zsum.value() / static_cast<double>(pz.M);
            if (pz.M >= 2) {
                NeumaierSum dev;
                for (double z : zs) dev.add((z - pz.zbar) * (z - pz.zbar));
                pz.s2w = dev.value() / static_cast<double>(pz.M - 1);
            } else {
                pz.s2w = 0.0;
            }
            psus.push_back(std::move(pz));
        }
        const double mbar = static_cast<double>(m_total) / frame.psu_count();
        // frame_z's between mean square runs over the supplied psus, which is
        // all N of them here, and its grand mean uses the M_i-weighted form.
        out.push_back(frame_z(frame, fd.n, psus, mbar));
    }
    return out;
}

double mf_mean(const Population& pop, const SampleDraw& draw, const WeightTable& weights) {
    check_coverage(draw, weights, table_frame_ids(weights));
    NeumaierSum sum;
    for (const auto& e : weights.entries) {
        sum.add(e.w * pop.unit_yield(e.unit));
    }
    return sum.value();
}

double mf_variance_est(const Population& pop, const SampleDraw& draw,
                       const WeightTable& weights, FpcForm fpc) {
    const std::vector<FrameZ> stats = zstats_sample(pop, draw, weights);
    for (const auto& fz : stats) {
        if (fz.n < 2) {
            throw std::runtime_error("between-psu variance undefined: frame " +
                                     std::to_string(fz.frame_id) + " has n=" +
                                     std::to_string(fz.n) + " sampled psu");
        }
    }
    NeumaierSum total;
    for (const auto& fz : stats) {
        total.add(fz.mbar * (1.0 - fz.f1) * fz.s2b);
        NeumaierSum within;
        for (const auto& p : fz.psus) {
            within.add(fpc_within(p.f2, fpc) * p.s2w);
        }
        total.add(fz.f1 * within.value());
    }
    return total.value();
}

MfEstimate mf_estimate(const Population& pop, const SampleDraw& draw,
                       const WeightTable& weights, FpcForm fpc) {
    MfEstimate e;
    e.mean = mf_mean(pop, draw, weights);
    e.var_est = mf_variance_est(pop, draw, weights, fpc);
    e.se = std::sqrt(e.var_est);
    return e;
}

WeightTable population_weights(const Population& pop, const DesignSpec& design,
                               WeightRule rule) {
    validate_design(pop, design);
    std::map<int, RealizedFrameDesign> realized;
    for (const auto& frame : pop.frames) {
        const FrameDesign& fd = design.frame(frame.id);
        if (fd.policy != MPolicy::fixed) {
            throw std::invalid_argument("population-level weights need a fixed design for "
                                        "frame " +
                                        std::to_string(frame.id));
        }
        realized.emplace(frame.id, resolve_frame_design(frame, fd, nullptr));
    }

    std::vector<WeightEntry> entries;
    for (const auto& frame : pop.frames) {
        for (int i = 0; i < frame.psu_count(); ++i) {
            for (int unit : frame.psus[i].units) {
                const UnitRecord& u = pop.units[static_cast<std::size_t>(unit)];
                NeumaierSum pi_sum;
                for (const auto& [fid, psu] : u.memberships) {
                    const Frame& mf = pop.frame(fid);
                    double pi = star_probability(mf, realized.at(fid), psu);
                    if (rule == WeightRule::plain_pi) {
                        pi *= static_cast<double>(mf.ssu_total());
                    }
                    pi_sum.add(pi);
                }
                WeightEntry e;
                e.frame_id = frame.id;
                e.psu_index = i;
                e.unit = unit;
                e.pi_sum = pi_sum.value();
                e.raw = 1.0 / e.pi_sum;
                entries.push_back(e);
            }
        }
    }

    // Normalize by the expected per-draw normalizer E[sum of sampled raw].
    NeumaierSum norm;
    for (const auto& e : entries) {
        const Frame& frame = pop.frame(e.frame_id);
        norm.add(inclusion_probability(frame, e.psu_index, design.frame(e.frame_id)) * e.raw);
    }
    WeightTable table;
    table.norm = norm.value();
    for (auto& e : entries) e.w = e.raw / table.norm;
    std::sort(entries.begin(), entries.end(), [](const WeightEntry& a, const WeightEntry& b) {
        if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
        if (a.psu_index != b.psu_index) return a.psu_index < b.psu_index;
        return a.unit < b.unit;
    });
    table.entries = std::move(entries);
    table.build_lookup();
    return table;
}

double mf_variance_population(const Population& pop, const DesignSpec& design,
                              const WeightTable& pop_weights, FpcForm fpc) {
    const std::vector<FrameZ> stats = zstats_population(pop, design, pop_weights);
    NeumaierSum total;
    for (const auto& fz : stats) {
        total.add(fz.mbar * (1.0 - fz.f1) * fz.s2b);
        NeumaierSum within;
        for (const auto& p : fz.psus) {
            within.add(fpc_within(p.f2, fpc) * p.s2w);
        }
        total.add(fz.f1 * within.value());
    }
    return total.value();
}

// ---------------------------------------------------------------------------

namespace {

void check_summary(const SfSummary& s) {
    if (s.psus.empty()) throw std::invalid_argument("summary has no sampled psus");
    const double n = static_cast<double>(s.psus.size());
    if (s.N < n) {
        throw std::invalid_argument("summary inconsistent: N < number of sampled psu rows");
    }
    if (!(s.Mbar > 0)) throw std::invalid_argument("summary inconsistent: Mbar must be positive");
    for (const auto& r : s.psus) {
        if (r.m < 1 || r.M < r.m) {
            throw std::invalid_argument("summary inconsistent: need 1 <= m_i <= M_i");
        }
    }
}

} // namespace

double sf_two_stage_mean(const SfSummary& s) {
    check_summary(s);
    const double n = static_cast<double>(s.psus.size());
    NeumaierSum num;
    for (const auto& r : s.psus) num.add(r.M * r.ybar);
    return num.value() / (n * s.Mbar);
}

double sf_two_stage_variance(const SfSummary& s) {
    check_summary(s);
    const double n = static_cast<double>(s.psus.size());
    if (n < 2) {
        throw std::runtime_error("between-psu variance undefined: single sampled psu");
    }
    NeumaierSum within;
    for (const auto& r : s.psus) {
        within.add((r.M / s.Mbar) * (1.0 / r.m - 1.0 / r.M) * r.s2w);
    }
    return (1.0 / n - 1.0 / s.N) * s.s2b + within.value() / (n * s.N);
}

SfEstimate sf_from_summary(const SfSummary& s) {
    SfEstimate e;
    e.mean = sf_two_stage_mean(s);
    e.s2_between = s.s2b;
    for (const auto& r : s.psus) e.s2_within.push_back(r.s2w);
    e.var = sf_two_stage_variance(s);
    e.negative_variance = e.var < 0.0;
    e.se = e.negative_variance ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(e.var);
    return e;
}

SfSummary summarize_frame_sample(const Population& pop, const Frame& frame,
                                 const FrameSample& sample) {
    SfSummary s;
    s.N = frame.psu_count();
    s.Mbar = frame.mbar();
    for (const auto& p : sample.psus) {
        SfPsuRow row;
        row.M = frame.psus[p.psu_index].size();
        row.m = p.m();
        NeumaierSum ysum;
        for (int unit : p.units) ysum.add(pop.unit_yield(unit));
        row.ybar = ysum.value() / row.m;
        if (p.m() >= 2) {
            NeumaierSum dev;
            for (int unit : p.units) {
                const double d = pop.unit_yield(unit) - row.ybar;
                dev.add(d * d);
            }
            row.s2w = dev.value() / (row.m - 1.0);
        }
        s.psus.push_back(row);
    }
    // Between mean square of the expanded psu means (M_i/Mbar) ybar_i.
    if (s.psus.size() >= 2) {
        const double n = static_cast<double>(s.psus.size());
        NeumaierSum usum;
        for (const auto& r : s.psus) usum.add((r.M / s.Mbar) * r.ybar);
        const double ubar = usum.value() / n;
        NeumaierSum dev;
        for (const auto& r : s.psus) {
            const double d = (r.M / s.Mbar) * r.ybar - ubar;
            dev.add(d * d);
        }
        s.s2b = dev.value() / (n - 1.0);
    }
    return s;
}

// ---------------------------------------------------------------------------

std::vector<double> relative_efficiency(std::span<const double> se) {
    if (se.empty()) throw std::invalid_argument("relative efficiency of an empty list");
    double best = std::numeric_limits<double>::infinity();
    for (double v : se) {
        if (!(v > 0.0)) throw std::invalid_argument("relative efficiency needs positive SEs");
        best = std::min(best, v);
    }
    std::vector<double> out;
    out.reserve(se.size());
    for (double v : se) out.push_back(best / v);
    return out;
}

double percentage_deviation(double estimate, double reference) {
    if (!(reference > 0.0)) {
        throw std::invalid_argument("percentage deviation needs a positive reference yield");
    }
    return (estimate / reference) * 100.0 - 100.0;
}

ComparisonReport compare_combinations(const Population& pop, const SampleDraw& draw,
                                      const DesignSpec& design, double reference_yield,
                                      WeightRule rule, FpcForm fpc) {
    if (pop.frames.empty()) throw std::invalid_argument("population has no frames");
    ComparisonReport report;
    report.reference_yield = reference_yield;

    std::vector<int> ids;
    for (const auto& f : pop.frames) ids.push_back(f.id);

    // All nonempty subsets ordered by (size, lexicographic id order).
    const int A = static_cast<int>(ids.size());
    std::vector<std::vector<int>> combos;
    for (int size = 1; size <= A; ++size) {
        std::vector<int> pick(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) pick[i] = i;
        for (;;) {
            std::vector<int> combo;
            for (int i : pick) combo.push_back(ids[static_cast<std::size_t>(i)]);
            combos.push_back(combo);
            int i = size - 1;
            while (i >= 0 && pick[i] == A - size + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }

    for (const auto& combo : combos) {
        ComparisonRow row;
        row.frame_ids = combo;
        for (std::size_t i = 0; i < combo.size(); ++i) {
            if (i) row.combination += '+';
            row.combination += std::to_string(combo[i]);
        }
        try {
            const WeightTable w = compute_weights(pop, draw, design, combo, rule);
            const MfEstimate est = mf_estimate(pop, draw, w, fpc);
            row.mean = est.mean;
            row.se = est.se;
            row.pd = percentage_deviation(est.mean, reference_yield);
        } catch (const std::exception& ex) {
            row.error = ex.what();
            row.mean = row.se = row.pd = std::numeric_limits<double>::quiet_NaN();
        }
        row.re = std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(std::move(row));
    }

    // Relative efficiency across the successful rows with a positive SE
    // (a census combination has SE exactly 0 and no meaningful efficiency).
    std::vector<double> ses;
    for (const auto& r : report.rows) {
        if (r.ok() && r.se > 0.0) ses.push_back(r.se);
    }
    if (!ses.empty()) {
        const std::vector<double> res = relative_efficiency(ses);
        std::size_t k = 0;
        for (auto& r : report.rows) {
            if (r.ok() && r.se > 0.0) r.re = res[k++];
        }
    }
    return report;
}

} // namespace mfy
