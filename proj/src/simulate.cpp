#include "mfy/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfy/rng.hpp"
#include "mfy/summation.hpp"
#include "mfy/weights.hpp"

namespace mfy {

namespace {

constexpr std::uint64_t kTagField = 0x6669656c64ULL; // "field"
constexpr std::uint64_t kTagBand = 0x62616e64ULL;    // "band"
constexpr std::uint64_t kTagPlace = 0x706c616365ULL; // "place"
constexpr std::uint64_t kTagMc = 0x6d63ULL;          // "mc"

} // namespace

SynthResult generate_population(const SynthSpec& spec) {
    if (spec.grid_w < 1 || spec.grid_h < 1 || spec.bands < 1 || spec.list_psus < 1 ||
        spec.list_psu_size < 1) {
        throw std::invalid_argument("synthetic spec needs positive dimensions");
    }
    const int points = spec.list_psus * spec.list_psu_size;
    const int cells = spec.grid_w * spec.grid_h;
    if (points > cells) {
        throw std::invalid_argument("more units than grid cells: " + std::to_string(points) +
                                    " > " + std::to_string(cells));
    }
    if (spec.list_n < 1 || spec.list_n > spec.list_psus || spec.list_m < 1 ||
        spec.list_m > spec.list_psu_size) {
        throw std::invalid_argument("list design out of range for the synthetic spec");
    }

    // Smooth yield field over the grid plus unit-level noise.
    Rng field_rng(derive_seed(spec.seed, {kTagField}));
    auto field = [&](int row, int col) {
        const double u = (col + 0.5) / spec.grid_w;
        const double v = (row + 0.5) / spec.grid_h;
        return spec.yield_base + spec.trend * (0.6 * u + 0.4 * v) +
               0.25 * spec.trend * std::sin(6.2831853071795864769 * u) *
                   std::cos(3.1415926535897932385 * v);
    };

    // Distinct cells for the ground units.
    Rng place_rng(derive_seed(spec.seed, {kTagPlace}));
    std::vector<int> cells_perm(static_cast<std::size_t>(cells));
    std::iota(cells_perm.begin(), cells_perm.end(), 0);
    for (int i = cells - 1; i > 0; --i) {
        const int j = static_cast<int>(place_rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(cells_perm[i], cells_perm[j]);
    }

    std::vector<UnitRecord> units;
    units.reserve(static_cast<std::size_t>(points));
    FramePartition list_frame;
    list_frame.frame_id = 1;
    list_frame.psus.resize(static_cast<std::size_t>(spec.list_psus));
    for (int d = 0; d < spec.list_psus; ++d) {
        list_frame.psus[d].first = "d" + std::to_string(d + 1);
    }
    for (int i = 0; i < points; ++i) {
        const int cell = cells_perm[i];
        const int row = cell / spec.grid_w;
        const int col = cell % spec.grid_w;
        UnitRecord u;
        u.id = "u" + std::to_string(i + 1);
        u.location = {{col + 0.5, row + 0.5}};
        u.yield = field(row, col) + spec.yield_noise * field_rng.normal();
        const int d = i / spec.list_psu_size;
        list_frame.psus[static_cast<std::size_t>(d)].second.push_back(u.id);
        units.push_back(std::move(u));
    }

    SynthResult out;
    out.population = build_population(std::move(units), {list_frame});

    NeumaierSum truth;
    for (const auto& u : out.population.units) truth.add(*u.yield);
    out.population.true_mean = truth.value() / static_cast<double>(points);

    // Satellite rasters: bands affine in the yield field plus noise, so
    // spectrally similar pixels have similar yields.
    for (std::size_t s = 0; s < spec.cluster_counts.size(); ++s) {
        const int frame_id = static_cast<int>(s) + 2;
        Rng band_rng(derive_seed(spec.seed, {kTagBand, static_cast<std::uint64_t>(frame_id)}));
        Raster r;
        r.width = spec.grid_w;
        r.height = spec.grid_h;
        r.bands = spec.bands;
        r.pixels.resize(static_cast<std::size_t>(cells) * spec.bands);
        for (int row = 0; row < spec.grid_h; ++row) {
            for (int col = 0; col < spec.grid_w; ++col) {
                const double f = field(row, col);
                double* px = r.pixels.data() +
                             (static_cast<std::size_t>(row) * spec.grid_w + col) * spec.bands;
                for (int b = 0; b < spec.bands; ++b) {
                    const double gain = 0.01 * (1.0 + 0.35 * b);
                    const double offset = 12.0 * (b + 1);
                    px[b] = offset + gain * f + spec.band_noise * band_rng.normal();
                }
            }
        }

        KmeansOptions opt;
        opt.seed = derive_seed(spec.seed, {0x636c7573ULL, static_cast<std::uint64_t>(frame_id)});
        ClusterModel model = kmeans(r, spec.cluster_counts[s], opt);
        build_satellite_frame(out.population, r, model, frame_id);
        out.rasters.push_back(std::move(r));
        out.models.push_back(std::move(model));
    }

    // Fixed list design, realized satellites.
    DesignSpec design;
    design.seed = spec.seed;
    {
        FrameDesign fd;
        fd.frame_id = 1;
        fd.policy = MPolicy::fixed;
        fd.n = spec.list_n;
        fd.m.assign(static_cast<std::size_t>(spec.list_psus), spec.list_m);
        design.frames.push_back(std::move(fd));
    }
    for (std::size_t s = 0; s < spec.cluster_counts.size(); ++s) {
        FrameDesign fd;
        fd.frame_id = static_cast<int>(s) + 2;
        fd.policy = MPolicy::realized;
        design.frames.push_back(std::move(fd));
    }
    out.design = std::move(design);
    return out;
}

namespace {

double population_mean(const Population& pop) {
    if (pop.true_mean) return *pop.true_mean;
    NeumaierSum s;
    std::size_t count = 0;
    for (const auto& u : pop.units) {
        if (u.yield) {
            s.add(*u.yield);
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("population has no yields");
    return s.value() / static_cast<double>(count);
}

double rel_err(double value, double truth) {
    return std::abs(value - truth) / std::abs(truth);
}

} // namespace

OracleReport unbiasedness_oracle(const Population& pop, const DesignSpec& design,
                                 std::size_t cap) {
    OracleReport rep;
    rep.seed = design.seed;
    rep.population_mean = population_mean(pop);

    NeumaierSum mass, mean_acc, m2_acc, est_acc, est_mass;
    std::size_t draws = 0;
    enumerate_samples(pop, design, [&](const SampleDraw& draw, double prob) {
        const WeightTable w = compute_weights(pop, draw, design);
        const double est = mf_mean(pop, draw, w);
        mass.add(prob);
        mean_acc.add(prob * est);
        m2_acc.add(prob * est * est);
        try {
            const double v = mf_variance_est(pop, draw, w);
            est_acc.add(prob * v);
            est_mass.add(prob);
        } catch (const std::exception&) {
            // variance estimator undefined on this draw (some frame has n < 2)
        }
        ++draws;
    }, cap);

    rep.draws = draws;
    const double total_mass = mass.value();
    if (std::abs(total_mass - 1.0) > 1e-12) {
        throw std::runtime_error("enumeration probability mass " + std::to_string(total_mass) +
                                 " is not 1");
    }
    rep.expected_estimate = mean_acc.value();
    rep.relative_error = rel_err(rep.expected_estimate, rep.population_mean);
    rep.exact_variance = m2_acc.value() - rep.expected_estimate * rep.expected_estimate;
    if (rep.exact_variance < 0.0 && rep.exact_variance > -1e-18) rep.exact_variance = 0.0;

    rep.var_est_defined_mass = est_mass.value();
    if (rep.var_est_defined_mass > 0.0) {
        rep.var_est_mean = est_acc.value() / rep.var_est_defined_mass;
        if (rep.exact_variance > 0.0) {
            rep.var_est_over_exact = *rep.var_est_mean / rep.exact_variance;
        }
    }

    if (design.all_fixed()) {
        const WeightTable pw = population_weights(pop, design);
        rep.analytic_variance = mf_variance_population(pop, design, pw);
        if (rep.exact_variance > 0.0) {
            rep.analytic_over_exact = *rep.analytic_variance / rep.exact_variance;
        }
    }
    return rep;
}

std::vector<double> monte_carlo_estimates(const Population& pop, const DesignSpec& design,
                                          std::size_t replications, std::uint64_t seed,
                                          bool parallel) {
    validate_design(pop, design);
    std::vector<double> estimates(replications, 0.0);
    const long long r_count = static_cast<long long>(replications);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (long long r = 0; r < r_count; ++r) {
        const std::uint64_t draw_seed =
            derive_seed(seed, {kTagMc, static_cast<std::uint64_t>(r)});
        const SampleDraw draw = draw_joint(pop, design, draw_seed);
        const WeightTable w = compute_weights(pop, draw, design);
        estimates[static_cast<std::size_t>(r)] = mf_mean(pop, draw, w);
    }
    (void)parallel;
    return estimates;
}

OracleReport monte_carlo(const Population& pop, const DesignSpec& design,
                         std::size_t replications, std::uint64_t seed) {
    if (replications < 2) throw std::invalid_argument("monte carlo needs at least 2 replications");
    validate_design(pop, design);
    OracleReport rep;
    rep.seed = seed;
    rep.replications = replications;
    rep.population_mean = population_mean(pop);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> estimates(replications, 0.0);
    std::vector<double> var_ests(replications, nan);
    const long long r_count = static_cast<long long>(replications);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < r_count; ++r) {
        const std::uint64_t draw_seed =
            derive_seed(seed, {kTagMc, static_cast<std::uint64_t>(r)});
        const SampleDraw draw = draw_joint(pop, design, draw_seed);
        const WeightTable w = compute_weights(pop, draw, design);
        estimates[static_cast<std::size_t>(r)] = mf_mean(pop, draw, w);
        try {
            var_ests[static_cast<std::size_t>(r)] = mf_variance_est(pop, draw, w);
        } catch (const std::exception&) {
            // variance estimator undefined on this draw
        }
    }

    // Reductions are serial in replication order.
    NeumaierSum sum;
    for (double e : estimates) sum.add(e);
    const double mean = sum.value() / static_cast<double>(replications);
    NeumaierSum dev;
    for (double e : estimates) dev.add((e - mean) * (e - mean));
    const double var = dev.value() / static_cast<double>(replications - 1);

    rep.expected_estimate = mean;
    rep.relative_error = rel_err(mean, rep.population_mean);
    rep.empirical_variance = var;
    rep.sem = std::sqrt(var / static_cast<double>(replications));

    NeumaierSum est_acc;
    std::size_t est_defined = 0;
    for (double v : var_ests) {
        if (!std::isnan(v)) {
            est_acc.add(v);
            ++est_defined;
        }
    }
    rep.var_est_defined_mass =
        static_cast<double>(est_defined) / static_cast<double>(replications);
    if (est_defined > 0) {
        rep.var_est_mean = est_acc.value() / static_cast<double>(est_defined);
        if (var > 0.0) rep.var_est_over_exact = *rep.var_est_mean / var;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Bundled desk instances. Unit-transitive symmetric designs where the
// estimator's exact unbiasedness is provable, plus the variance-oracle and
// census-collapse cases.

namespace {

Population grid_population(int rows, int cols, std::uint64_t seed) {
    std::vector<UnitRecord> units;
    FramePartition rows_part, cols_part;
    rows_part.frame_id = 1;
    cols_part.frame_id = 2;
    rows_part.psus.resize(static_cast<std::size_t>(rows));
    cols_part.psus.resize(static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) rows_part.psus[r].first = "r" + std::to_string(r + 1);
    for (int c = 0; c < cols; ++c) cols_part.psus[c].first = "q" + std::to_string(c + 1);
    Rng rng(seed);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            UnitRecord u;
            u.id = "g" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
            u.yield = 2000.0 + 3000.0 * rng.uniform();
            rows_part.psus[r].second.push_back(u.id);
            cols_part.psus[c].second.push_back(u.id);
            units.push_back(std::move(u));
        }
    }
    return build_population(std::move(units), {rows_part, cols_part});
}

Population cube_population(int nx, int ny, int nz, std::uint64_t seed) {
    std::vector<UnitRecord> units;
    FramePartition fx{1, {}}, fy{2, {}}, fz{3, {}};
    fx.psus.resize(static_cast<std::size_t>(nx));
    fy.psus.resize(static_cast<std::size_t>(ny));
    fz.psus.resize(static_cast<std::size_t>(nz));
    for (int i = 0; i < nx; ++i) fx.psus[i].first = "x" + std::to_string(i + 1);
    for (int i = 0; i < ny; ++i) fy.psus[i].first = "y" + std::to_string(i + 1);
    for (int i = 0; i < nz; ++i) fz.psus[i].first = "z" + std::to_string(i + 1);
    Rng rng(seed);
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            for (int z = 0; z < nz; ++z) {
                UnitRecord u;
                u.id = "c" + std::to_string(x + 1) + "_" + std::to_string(y + 1) + "_" +
                       std::to_string(z + 1);
                u.yield = 2500.0 + 2500.0 * rng.uniform();
                fx.psus[x].second.push_back(u.id);
                fy.psus[y].second.push_back(u.id);
                fz.psus[z].second.push_back(u.id);
                units.push_back(std::move(u));
            }
        }
    }
    return build_population(std::move(units), {fx, fy, fz});
}

FrameDesign fixed_design(int frame_id, int n, int psus, int m) {
    FrameDesign fd;
    fd.frame_id = frame_id;
    fd.policy = MPolicy::fixed;
    fd.n = n;
    fd.m.assign(static_cast<std::size_t>(psus), m);
    return fd;
}

FrameDesign realized_design(int frame_id) {
    FrameDesign fd;
    fd.frame_id = frame_id;
    fd.policy = MPolicy::realized;
    return fd;
}

} // namespace

std::vector<std::string> desk_instance_names() {
    return {"grid2_shared",  "grid2_independent", "cube3_shared",
            "cube3_independent", "census_collapse",   "srs_unit",
            "const_psus",    "lopsided_shared"};
}

DeskInstance make_desk_instance(const std::string& name) {
    DeskInstance inst;
    inst.name = name;

    if (name == "grid2_shared") {
        inst.note = "3x4 row/column grid, shared two-stage draw from the row frame";
        inst.population = grid_population(3, 4, 1101);
        inst.design.seed = 1101;
        inst.design.frames = {fixed_design(1, 2, 3, 2), realized_design(2)};
        return inst;
    }
    if (name == "grid2_independent") {
        inst.note = "3x4 row/column grid, independent fixed draws in both frames";
        inst.population = grid_population(3, 4, 1102);
        inst.design.seed = 1102;
        inst.design.frames = {fixed_design(1, 2, 3, 2), fixed_design(2, 2, 4, 2)};
        return inst;
    }
    if (name == "cube3_shared") {
        inst.note = "2x3x2 slab cube, shared draw from the x frame imposed on y and z";
        inst.population = cube_population(2, 3, 2, 1103);
        inst.design.seed = 1103;
        inst.design.frames = {fixed_design(1, 2, 2, 2), realized_design(2), realized_design(3)};
        return inst;
    }
    if (name == "cube3_independent") {
        inst.note = "2x2x2 slab cube, independent single-psu draws in all three frames";
        inst.population = cube_population(2, 2, 2, 1104);
        inst.design.seed = 1104;
        inst.design.frames = {fixed_design(1, 1, 2, 2), fixed_design(2, 1, 2, 2),
                              fixed_design(3, 1, 2, 2)};
        return inst;
    }
    if (name == "census_collapse") {
        // Both frames are the full population under a census design: every
        // variance figure is exactly zero and the estimate is the mean.
        inst.note = "two identical complete frames, census at both stages";
        std::vector<UnitRecord> units;
        FramePartition f1{1, {}}, f2{2, {}};
        f1.psus = {{"a", {}}, {"b", {}}};
        f2.psus = {{"a", {}}, {"b", {}}};
        const double ys[6] = {3100, 2800, 3550, 2300, 4100, 3000};
        for (int i = 0; i < 6; ++i) {
            UnitRecord u;
            u.id = "v" + std::to_string(i + 1);
            u.yield = ys[i];
            f1.psus[i < 3 ? 0 : 1].second.push_back(u.id);
            f2.psus[i < 3 ? 0 : 1].second.push_back(u.id);
            units.push_back(std::move(u));
        }
        inst.population = build_population(std::move(units), {f1, f2});
        inst.design.seed = 1105;
        FrameDesign d1 = fixed_design(1, 2, 2, 3);
        FrameDesign d2 = fixed_design(2, 2, 2, 3);
        inst.design.frames = {d1, d2};
        return inst;
    }
    if (name == "srs_unit") {
        // Single frame of unit-sized psus, n = 1: the analytic variance
        // matches the exact enumeration variance exactly.
        inst.note = "single frame, 5 unit-sized psus, n=1, m=1";
        std::vector<UnitRecord> units;
        FramePartition f1{1, {}};
        const double ys[5] = {3120, 4180, 2410, 3990, 2750};
        for (int i = 0; i < 5; ++i) {
            UnitRecord u;
            u.id = "s" + std::to_string(i + 1);
            u.yield = ys[i];
            f1.psus.push_back({"p" + std::to_string(i + 1), {u.id}});
            units.push_back(std::move(u));
        }
        inst.population = build_population(std::move(units), {f1});
        inst.design.seed = 1106;
        inst.design.frames = {fixed_design(1, 1, 5, 1)};
        return inst;
    }
    if (name == "const_psus") {
        // Single frame, equal psu sizes, yields constant within each psu,
        // n=1, m=1: the other exact case for the analytic variance.
        inst.note = "single frame, 4 equal psus of 3, constant yield within psus, n=1, m=1";
        std::vector<UnitRecord> units;
        FramePartition f1{1, {}};
        const double vals[4] = {2210, 2950, 3640, 4070};
        for (int p = 0; p < 4; ++p) {
            std::pair<std::string, std::vector<std::string>> psu{"p" + std::to_string(p + 1), {}};
            for (int j = 0; j < 3; ++j) {
                UnitRecord u;
                u.id = "k" + std::to_string(p + 1) + "_" + std::to_string(j + 1);
                u.yield = vals[p];
                psu.second.push_back(u.id);
                units.push_back(std::move(u));
            }
            f1.psus.push_back(std::move(psu));
        }
        inst.population = build_population(std::move(units), {f1});
        inst.design.seed = 1107;
        inst.design.frames = {fixed_design(1, 1, 4, 1)};
        return inst;
    }
    if (name == "lopsided_shared") {
        // Deliberately asymmetric two-frame instance; the oracle quantifies
        // the normalization bias instead of asserting exactness.
        inst.note = "asymmetric psu sizes, shared draw; reported, not asserted";
        std::vector<UnitRecord> units;
        FramePartition f1{1, {}}, f2{2, {}};
        f1.psus = {{"a", {}}, {"b", {}}, {"c", {}}};
        f2.psus = {{"u", {}}, {"v", {}}};
        const int psu_of[9] = {0, 0, 1, 1, 1, 1, 2, 2, 2};
        const int alt_of[9] = {0, 1, 0, 0, 1, 1, 0, 1, 1};
        Rng rng(1108);
        for (int i = 0; i < 9; ++i) {
            UnitRecord u;
            u.id = "w" + std::to_string(i + 1);
            u.yield = 2000.0 + 2600.0 * rng.uniform();
            f1.psus[psu_of[i]].second.push_back(u.id);
            f2.psus[alt_of[i]].second.push_back(u.id);
            units.push_back(std::move(u));
        }
        inst.population = build_population(std::move(units), {f1, f2});
        inst.design.seed = 1108;
        FrameDesign fd1;
        fd1.frame_id = 1;
        fd1.policy = MPolicy::fixed;
        fd1.n = 2;
        fd1.m = {1, 2, 2}; // within each psu's size
        inst.design.frames = {fd1, realized_design(2)};
        return inst;
    }
    throw std::invalid_argument("unknown desk instance '" + name + "'");
}

} // namespace mfy
