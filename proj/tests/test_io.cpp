#include "doctest.h"

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <string>

#include "mfy/config.hpp"
#include "mfy/io.hpp"
#include "mfy/rng.hpp"
#include "mfy/simulate.hpp"
#include "test_helpers.hpp"

using namespace mfy;
using namespace mfy::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mfy_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("population file round trip") {
    const Population pop = hand_weight_population();
    Population with_meta = pop;
    with_meta.true_mean = 3321.0625;

    TempDir tmp;
    const std::string path = tmp.file("pop.csv");
    io::write_population(with_meta, path);
    const Population back = io::read_population(path);

    REQUIRE(back.units.size() == with_meta.units.size());
    CHECK(back.true_mean == with_meta.true_mean);
    for (const auto& u : with_meta.units) {
        const int i = back.unit_index(u.id);
        REQUIRE(i >= 0);
        const UnitRecord& v = back.units[static_cast<std::size_t>(i)];
        CHECK(v.yield == u.yield);
        CHECK(v.memberships.size() == u.memberships.size());
    }
    REQUIRE(back.frames.size() == 3);
    for (const auto& f : with_meta.frames) {
        const Frame& g = back.frame(f.id);
        CHECK(g.psu_count() == f.psu_count());
        CHECK(g.ssu_total() == f.ssu_total());
    }

    SUBCASE("writing is deterministic") {
        const std::string path2 = tmp.file("pop2.csv");
        io::write_population(with_meta, path2);
        CHECK(io::read_text_file(path) == io::read_text_file(path2));
    }
}

TEST_CASE("raster round trips") {
    Raster r;
    r.width = 5;
    r.height = 3;
    r.bands = 2;
    r.origin_x = 10.5;
    r.origin_y = -4.25;
    r.psize_x = 0.5;
    r.psize_y = 2.0;
    Rng rng(8);
    r.pixels.resize(30);
    for (auto& v : r.pixels) v = 1000.0 * rng.uniform() - 500.0;

    TempDir tmp;
    SUBCASE("text") {
        const std::string path = tmp.file("r.csv");
        io::write_raster_text(r, path);
        const Raster back = io::read_raster(path);
        CHECK(back.width == r.width);
        CHECK(back.psize_y == r.psize_y);
        CHECK(back.pixels == r.pixels); // %.17g round-trips doubles exactly
    }
    SUBCASE("binary") {
        const std::string path = tmp.file("r.bin");
        io::write_raster_binary(r, path);
        const Raster back = io::read_raster(path);
        CHECK(back.pixels == r.pixels);
        CHECK(back.origin_x == r.origin_x);
    }
    SUBCASE("size mismatch is rejected") {
        const std::string path = tmp.file("bad.csv");
        io::write_text_file(path, "2,2,1,0,0,1,1\n1,2\n3\n");
        CHECK_THROWS_WITH_AS(io::read_raster(path), doctest::Contains("values"),
                             std::runtime_error);
    }
}

TEST_CASE("label raster round trip") {
    Raster georef;
    georef.width = 4;
    georef.height = 2;
    georef.bands = 3; // band count of the source; labels file stores one band
    georef.pixels.assign(24, 0.0);
    const std::vector<int> labels = {0, 1, 2, 1, 0, 0, 2, 2};

    TempDir tmp;
    const std::string path = tmp.file("labels.csv");
    io::write_label_raster(georef, labels, path);
    const io::LabelRaster back = io::read_label_raster(path);
    CHECK(back.labels == labels);
    CHECK(back.k == 3);
    CHECK(back.georef.bands == 1);
    CHECK(back.georef.width == 4);
}

TEST_CASE("points file") {
    TempDir tmp;
    const std::string path = tmp.file("points.csv");
    std::vector<io::PointsRow> rows = {
        {"u1", 0.5, 1.5, 3210.25, "d1"},
        {"u2", 2.5, 0.5, 2987.0, "d2"},
    };
    io::write_points(rows, path);
    const auto back = io::read_points(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].unit_id == "u1");
    CHECK(back[0].yield == 3210.25);
    CHECK(back[1].list_psu_id == "d2");

    SUBCASE("duplicate ids rejected") {
        rows.push_back({"u1", 3.5, 3.5, 100.0, "d1"});
        io::write_points(rows, path);
        CHECK_THROWS_WITH_AS(io::read_points(path), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
    SUBCASE("negative yield rejected") {
        io::write_text_file(path, "unit_id,x,y,yield,list_psu_id\nu9,0,0,-5,d1\n");
        CHECK_THROWS_WITH_AS(io::read_points(path), doctest::Contains("negative"),
                             std::runtime_error);
    }
}

TEST_CASE("bundled survey summary fixture") {
    const auto frames = io::read_summary(std::string(MFY_FIXTURE_DIR) + "/survey_summary.csv");
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].label == "list");
    CHECK(frames[0].summary.N == 20);
    CHECK(frames[0].summary.psus.size() == 2);
    CHECK(frames[1].summary.psus.size() == 6);
    CHECK(frames[2].summary.psus.size() == 4);
    CHECK(frames[2].se_published == 498);

    SUBCASE("inconsistent psu counts are rejected") {
        TempDir tmp;
        const std::string path = tmp.file("bad.csv");
        io::write_text_file(path,
                            "frame,label,row,N,n,Mbar,M_i,m_i,ybar_i,s2w_i,s2b,"
                            "mean_published,se_published\n"
                            "1,x,frame,5,2,3,,,,,100,1000,30\n"
                            "1,x,psu,,,,3,1,10,0,,,\n");
        CHECK_THROWS_WITH_AS(io::read_summary(path), doctest::Contains("declares n="),
                             std::runtime_error);
    }
    SUBCASE("empty summary is rejected") {
        TempDir tmp;
        const std::string path = tmp.file("empty.csv");
        io::write_text_file(path,
                            "frame,label,row,N,n,Mbar,M_i,m_i,ybar_i,s2w_i,s2b,"
                            "mean_published,se_published\n");
        CHECK_THROWS_WITH_AS(io::read_summary(path), doctest::Contains("empty"),
                             std::runtime_error);
    }
}

TEST_CASE("metrics reference fixture") {
    const auto rows =
        io::read_metrics_reference(std::string(MFY_FIXTURE_DIR) + "/metrics_reference.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows[6].combination == "list+wifs+liss3");
    CHECK(rows[6].re_published == 1.0);
}

TEST_CASE("comparison report formats deterministically") {
    ComparisonReport rep;
    rep.reference_yield = 3660;
    ComparisonRow a;
    a.combination = "1";
    a.frame_ids = {1};
    a.mean = 3688.32;
    a.se = 19.444;
    a.re = 0.99783;
    a.pd = 0.77377;
    ComparisonRow b = a;
    b.combination = "1+2";
    b.frame_ids = {1, 2};
    b.re = 1.0;
    rep.rows = {a, b};

    TempDir tmp;
    const std::string p1 = tmp.file("c1.csv");
    const std::string p2 = tmp.file("c2.csv");
    io::write_comparison_csv(rep, p1);
    io::write_comparison_csv(rep, p2);
    CHECK(io::read_text_file(p1) == io::read_text_file(p2));
    const std::string text = io::format_comparison_text(rep);
    CHECK(text.find("Single Frame") != std::string::npos);
    CHECK(text.find("Dual Frame") != std::string::npos);
    CHECK(text.find("3688.32") != std::string::npos);

    ComparisonRow failed;
    failed.combination = "2";
    failed.frame_ids = {2};
    failed.error = "between-psu variance undefined: frame 2 has n=1 sampled psu";
    rep.rows.push_back(failed);
    const std::string with_fail = io::format_comparison_text(rep);
    CHECK(with_fail.find("failed:") != std::string::npos);
}

TEST_CASE("oracle report serialization") {
    OracleReport rep;
    rep.instance = "grid2_shared";
    rep.seed = 1101;
    rep.draws = 108;
    rep.population_mean = 3500.0;
    rep.expected_estimate = 3500.0;
    rep.relative_error = 0.0;
    rep.exact_variance = 1234.5;
    rep.var_est_defined_mass = 1.0;
    const std::string kv = io::format_oracle_report(rep);
    CHECK(kv.find("instance = grid2_shared") != std::string::npos);
    CHECK(kv.find("exact_variance") != std::string::npos);
    const std::string row = io::oracle_report_csv_row(rep);
    CHECK(row.find("grid2_shared,1101,108") == 0);
}

TEST_CASE("config parsing") {
    const Config cfg = Config::parse_text(
        "# comment\n"
        "seed = 42\n"
        "[design]\n"
        "frame.1.n = 2\n"
        "frame.1.m = 3\n"
        "frame.2.m = realized\n"
        "[cluster]\n"
        "epsilon = 1e-4\n"
        "counts = 4,5,6\n");
    CHECK(cfg.get_u64("seed", 0) == 42);
    CHECK(cfg.get_int("design.frame.1.n") == 2);
    CHECK(cfg.get_str("design.frame.2.m") == "realized");
    CHECK(cfg.get_double("cluster.epsilon") == doctest::Approx(1e-4));
    CHECK(cfg.get_int_list("cluster.counts") == std::vector<int>{4, 5, 6});
    CHECK(cfg.get_int("missing", 7) == 7);
    CHECK_THROWS_AS(cfg.get_str("missing"), std::runtime_error);
    CHECK_THROWS_AS(Config::parse_text("novalue\n"), std::runtime_error);

    SUBCASE("overrides win") {
        Config c2 = cfg;
        c2.set("design.frame.1.n", "5");
        CHECK(c2.get_int("design.frame.1.n") == 5);
    }
}

TEST_CASE("design from config") {
    const Population pop = hand_weight_population(); // frames 1..3, N = 3, 2, 3
    const Config cfg = Config::parse_text(
        "seed = 11\n"
        "[design]\n"
        "frame.1.n = 2\n"
        "frame.1.m = 1\n" // broadcast to all three psus
        "frame.2.n = 1\n"
        "frame.2.m = 2,3\n");
    const DesignSpec d = design_from_config(cfg, pop);
    CHECK(d.seed == 11);
    REQUIRE(d.frames.size() == 3);
    CHECK(d.frame(1).policy == MPolicy::fixed);
    CHECK(d.frame(1).m == std::vector<int>{1, 1, 1});
    CHECK(d.frame(2).m == std::vector<int>{2, 3});
    CHECK(d.frame(3).policy == MPolicy::realized); // default
    validate_design(pop, d);
}
