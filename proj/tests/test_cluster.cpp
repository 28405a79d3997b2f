#include "doctest.h"

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfy/cluster.hpp"
#include "mfy/rng.hpp"
#include "test_helpers.hpp"

using namespace mfy;
using namespace mfy::testing;

namespace {

Raster unit_raster(int w, int h, int bands = 1) {
    Raster r;
    r.width = w;
    r.height = h;
    r.bands = bands;
    r.pixels.assign(static_cast<std::size_t>(w) * h * bands, 0.0);
    return r;
}

// Two well-separated 2-band blobs of 10 pixels each on a 5x4 grid.
Raster two_blob_raster(std::uint64_t seed) {
    Raster r = unit_raster(5, 4, 2);
    Rng rng(seed);
    for (int i = 0; i < 20; ++i) {
        const bool second = i >= 10;
        const double cx = second ? 80.0 : 10.0;
        const double cy = second ? 75.0 : 12.0;
        r.pixels[static_cast<std::size_t>(i) * 2] = cx + rng.normal();
        r.pixels[static_cast<std::size_t>(i) * 2 + 1] = cy + rng.normal();
    }
    return r;
}

// Exhaustive optimal 2-partition by total within-cluster squared distance.
std::vector<int> brute_force_two_partition(const Raster& r, double* best_sse_out) {
    const int n = r.pixel_count();
    const int p = r.bands;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_assign(static_cast<std::size_t>(n), 0);
    // pixel 0 pinned to side 0 to halve the space
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> assign(static_cast<std::size_t>(n), 0);
        for (int i = 1; i < n; ++i) assign[i] = (mask >> (i - 1)) & 1u;
        int count1 = 0;
        for (int a : assign) count1 += a;
        if (count1 == 0) continue; // need both sides nonempty
        double sum[2][8] = {{0}};
        int cnt[2] = {0, 0};
        for (int i = 0; i < n; ++i) {
            ++cnt[assign[i]];
            for (int b = 0; b < p; ++b) {
                sum[assign[i]][b] += r.pixels[static_cast<std::size_t>(i) * p + b];
            }
        }
        double sse = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int b = 0; b < p; ++b) {
                const double c = sum[assign[i]][b] / cnt[assign[i]];
                const double d = r.pixels[static_cast<std::size_t>(i) * p + b] - c;
                sse += d * d;
            }
        }
        if (sse < best) {
            best = sse;
            best_assign = assign;
        }
    }
    if (best_sse_out) *best_sse_out = best;
    return best_assign;
}

} // namespace

TEST_CASE("k = 1 gives the global mean and the total scatter") {
    Raster r = unit_raster(4, 3, 2);
    Rng rng(5);
    for (auto& v : r.pixels) v = 50.0 * rng.uniform();
    KmeansOptions opt;
    opt.seed = 1;
    const ClusterModel model = kmeans(r, 1, opt);

    double mean[2] = {0, 0};
    for (int i = 0; i < 12; ++i) {
        mean[0] += r.pixels[static_cast<std::size_t>(i) * 2];
        mean[1] += r.pixels[static_cast<std::size_t>(i) * 2 + 1];
    }
    mean[0] /= 12;
    mean[1] /= 12;
    CHECK(std::abs(model.centers[0] - mean[0]) <= 1e-12);
    CHECK(std::abs(model.centers[1] - mean[1]) <= 1e-12);

    double scatter = 0.0;
    for (int i = 0; i < 12; ++i) {
        for (int b = 0; b < 2; ++b) {
            const double d = r.pixels[static_cast<std::size_t>(i) * 2 + b] - mean[b];
            scatter += d * d;
        }
    }
    CHECK(model.sse == doctest::Approx(scatter).epsilon(1e-12));
    CHECK(model.sizes[0] == 12);
}

TEST_CASE("k equal to the number of distinct vectors gives zero energy") {
    Raster r = unit_raster(3, 2, 1);
    for (int i = 0; i < 6; ++i) r.pixels[i] = 10.0 * i;
    KmeansOptions opt;
    opt.seed = 2;
    const ClusterModel model = kmeans(r, 6, opt);
    CHECK(model.sse == doctest::Approx(0.0));
    std::set<int> used(model.assignment.begin(), model.assignment.end());
    CHECK(used.size() == 6);

    SUBCASE("asking for more clusters than distinct vectors fails") {
        CHECK_THROWS_WITH_AS(kmeans(r, 7, opt), doctest::Contains("distinct"),
                             std::invalid_argument);
    }
}

TEST_CASE("two-blob raster: k-means finds the exhaustive optimal partition") {
    const Raster r = two_blob_raster(31);
    KmeansOptions opt;
    opt.seed = 7;
    const ClusterModel model = kmeans(r, 2, opt);

    double best_sse = 0.0;
    const std::vector<int> best = brute_force_two_partition(r, &best_sse);

    // compare up to label swap
    std::vector<int> got = model.assignment;
    if (got[0] != best[0]) {
        for (auto& a : got) a = 1 - a;
    }
    CHECK(got == best);
    CHECK(model.sse == doctest::Approx(best_sse).epsilon(1e-10));

    // centers near the blob means
    double blob_mean[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 20; ++i) {
        const int side = i >= 10;
        blob_mean[side][0] += r.pixels[static_cast<std::size_t>(i) * 2] / 10.0;
        blob_mean[side][1] += r.pixels[static_cast<std::size_t>(i) * 2 + 1] / 10.0;
    }
    for (int c = 0; c < 2; ++c) {
        double best_dist = std::numeric_limits<double>::infinity();
        for (int side = 0; side < 2; ++side) {
            const double dx = model.centers[static_cast<std::size_t>(c) * 2] - blob_mean[side][0];
            const double dy =
                model.centers[static_cast<std::size_t>(c) * 2 + 1] - blob_mean[side][1];
            best_dist = std::min(best_dist, std::sqrt(dx * dx + dy * dy));
        }
        CHECK(best_dist < 0.1);
    }
}

TEST_CASE("energy log is non-increasing and the final assignment is a fixed point") {
    Raster r = unit_raster(16, 16, 3);
    Rng rng(99);
    for (auto& v : r.pixels) v = 100.0 * rng.uniform();
    KmeansOptions opt;
    opt.seed = 4;
    const ClusterModel model = kmeans(r, 5, opt);

    REQUIRE(!model.sse_log.empty());
    for (std::size_t i = 1; i < model.sse_log.size(); ++i) {
        CHECK(model.sse_log[i] <= model.sse_log[i - 1] * (1.0 + 1e-12));
    }
    CHECK(model.sse <= model.sse_log.front());
    CHECK(model.sse == doctest::Approx(sse(r, model)).epsilon(1e-12));

    // reassigning against the final centers changes nothing
    for (int i = 0; i < r.pixel_count(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < model.k; ++c) {
            double d = 0;
            for (int b = 0; b < 3; ++b) {
                const double t = r.pixels[static_cast<std::size_t>(i) * 3 + b] -
                                 model.centers[static_cast<std::size_t>(c) * 3 + b];
                d += t * t;
            }
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        CHECK(best == model.assignment[i]);
    }

    long long total = 0;
    for (long long s : model.sizes) {
        CHECK(s > 0);
        total += s;
    }
    CHECK(total == r.pixel_count());
}

TEST_CASE("identical seeds give identical models; serial and parallel agree bitwise") {
    Raster r = unit_raster(20, 15, 2);
    Rng rng(123);
    for (auto& v : r.pixels) v = 200.0 * rng.uniform();

    KmeansOptions serial;
    serial.seed = 11;
    serial.parallel = false;
    KmeansOptions parallel = serial;
    parallel.parallel = true;

    const ClusterModel a = kmeans(r, 4, serial);
    const ClusterModel b = kmeans(r, 4, serial);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centers == b.centers);
    CHECK(a.sse == b.sse);

#ifdef _OPENMP
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        const ClusterModel c = kmeans(r, 4, parallel);
        CHECK(c.assignment == a.assignment);
        CHECK(c.centers == a.centers);
        CHECK(c.sse == a.sse);
        CHECK(c.sse_log == a.sse_log);
    }
#else
    const ClusterModel c = kmeans(r, 4, parallel);
    CHECK(c.assignment == a.assignment);
    CHECK(c.centers == a.centers);
#endif
}

TEST_CASE("hand-computed 4-pixel energy") {
    // pixels {0, 1, 10, 12}, two clusters {0,1} and {10,12}:
    // centers 0.5 and 11, energy 0.25+0.25 + 1+1 = 2.5
    Raster r = unit_raster(4, 1, 1);
    r.pixels = {0.0, 1.0, 10.0, 12.0};
    ClusterModel model;
    model.k = 2;
    model.bands = 1;
    model.centers = {0.5, 11.0};
    model.assignment = {0, 0, 1, 1};
    model.sizes = {2, 2};
    CHECK(sse(r, model) == doctest::Approx(2.5).epsilon(1e-15));

    KmeansOptions opt;
    opt.seed = 2;
    const ClusterModel fitted = kmeans(r, 2, opt);
    CHECK(fitted.sse == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("non-finite pixel values are rejected") {
    Raster r = unit_raster(2, 1, 1);
    r.pixels = {1.0, std::numeric_limits<double>::quiet_NaN()};
    KmeansOptions opt;
    CHECK_THROWS_WITH_AS(kmeans(r, 1, opt), doctest::Contains("non-finite"),
                         std::invalid_argument);
}

TEST_CASE("greedy spread initialization also reaches the blob optimum") {
    const Raster r = two_blob_raster(31);
    KmeansOptions opt;
    opt.seed = 7;
    opt.greedy_spread_init = true;
    const ClusterModel model = kmeans(r, 2, opt);
    const std::vector<int> best = brute_force_two_partition(r, nullptr);
    std::vector<int> got = model.assignment;
    if (got[0] != best[0]) {
        for (auto& a : got) a = 1 - a;
    }
    CHECK(got == best);
}

TEST_CASE("standardized clustering records the band transform") {
    Raster r = unit_raster(6, 5, 2);
    Rng rng(9);
    for (int i = 0; i < 30; ++i) {
        r.pixels[static_cast<std::size_t>(i) * 2] = 5.0 + rng.uniform();        // small scale
        r.pixels[static_cast<std::size_t>(i) * 2 + 1] = 5000.0 + 900.0 * rng.uniform();
    }
    KmeansOptions opt;
    opt.seed = 3;
    opt.standardize = true;
    const ClusterModel model = kmeans(r, 3, opt);
    CHECK(model.standardized);
    REQUIRE(model.band_sd.size() == 2);
    CHECK(model.band_sd[1] > model.band_sd[0]);
    CHECK(sse(r, model) == doctest::Approx(model.sse).epsilon(1e-12));
}

TEST_CASE("locate maps world points to pixel cells") {
    Raster r = unit_raster(10, 8);
    SUBCASE("interior point") { CHECK(locate(r, 2.5, 3.5) == 3 * 10 + 2); }
    SUBCASE("cell boundaries belong to the higher-index cell") {
        CHECK(locate(r, 2.0, 3.0) == 3 * 10 + 2);
        CHECK(locate(r, 0.0, 0.0) == 0);
    }
    SUBCASE("outside the extent") {
        CHECK_THROWS_WITH_AS(locate(r, 10.0, 1.0), doctest::Contains("outside"),
                             std::invalid_argument);
        CHECK_THROWS_AS(locate(r, -0.001, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(locate(r, 1.0, 8.0), std::invalid_argument);
    }
    SUBCASE("georeferenced origin and cell size") {
        Raster g = unit_raster(4, 4);
        g.origin_x = 100.0;
        g.origin_y = 200.0;
        g.psize_x = 0.5;
        g.psize_y = 2.0;
        CHECK(locate(g, 101.2, 203.9) == 1 * 4 + 2);
    }
}

TEST_CASE("satellite frame construction") {
    // 4x3 raster, 2 clusters split by column parity; 3 located units.
    Raster r = unit_raster(4, 3, 1);
    std::vector<int> labels(12);
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 4; ++col) labels[row * 4 + col] = col < 2 ? 0 : 1;
    }

    auto make_units = [&] {
        std::vector<UnitRecord> units;
        UnitRecord a = unit("a", 100);
        a.location = {{0.5, 0.5}};
        UnitRecord b = unit("b", 200);
        b.location = {{1.5, 0.5}};
        UnitRecord c = unit("c", 300);
        c.location = {{3.5, 2.5}};
        units = {a, b, c};
        return units;
    };
    std::vector<UnitRecord> units = make_units();
    FramePartition list{1, {{"p", {"a", "b", "c"}}}};
    Population pop = build_population(std::move(units), {list});
    const Frame& frame = build_satellite_frame(pop, r, labels, 2, 2);

    CHECK(frame.psu_count() == 2);
    CHECK(frame.ssu_total() == 12);
    CHECK(frame.psus[0].size() == 6);
    CHECK(frame.psus[1].size() == 6);
    CHECK(pop.units[static_cast<std::size_t>(pop.unit_index("a"))].memberships.at(2) == 0);
    CHECK(pop.units[static_cast<std::size_t>(pop.unit_index("c"))].memberships.at(2) == 1);
    // fill units carry no yield and belong only to the satellite frame
    int fills = 0;
    for (const auto& u : pop.units) {
        if (!u.yield) {
            ++fills;
            CHECK(u.memberships.size() == 1);
        }
    }
    CHECK(fills == 9);

    SUBCASE("all points in one cluster leave the frame with a single sampled psu") {
        std::vector<int> sat_units = {pop.unit_index("a"), pop.unit_index("b")};
        const FrameSample fs = impose_frame(pop, pop.frame(2), sat_units);
        CHECK(fs.n() == 1);
    }
    SUBCASE("two units in one pixel are rejected") {
        std::vector<UnitRecord> us = make_units();
        us[1].location = {{0.6, 0.6}}; // same cell as a
        FramePartition l2{1, {{"p", {"a", "b", "c"}}}};
        Population p2 = build_population(std::move(us), {l2});
        CHECK_THROWS_WITH_AS(build_satellite_frame(p2, r, labels, 2, 2),
                             doctest::Contains("same pixel"), std::invalid_argument);
    }
    SUBCASE("unlocatable point is rejected") {
        std::vector<UnitRecord> us = make_units();
        us[2].location = {{99.0, 99.0}};
        FramePartition l2{1, {{"p", {"a", "b", "c"}}}};
        Population p2 = build_population(std::move(us), {l2});
        CHECK_THROWS_WITH_AS(build_satellite_frame(p2, r, labels, 2, 2),
                             doctest::Contains("outside"), std::invalid_argument);
    }
}
