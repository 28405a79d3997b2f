#include "doctest.h"

#include <stdexcept>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "mfy/cli.hpp"
#include "mfy/io.hpp"
#include "mfy/simulate.hpp"

using namespace mfy;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mfy_cli_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// The commands narrate to stdout; keep the test log clean.
struct QuietStdout {
    std::streambuf* saved;
    std::ostringstream sink;
    QuietStdout() : saved(std::cout.rdbuf(sink.rdbuf())) {}
    ~QuietStdout() { std::cout.rdbuf(saved); }
};

std::string fixture(const std::string& name) {
    return std::string(MFY_FIXTURE_DIR) + "/" + name;
}

Config base_cfg(const TempDir& tmp) {
    Config cfg = Config::parse_file(fixture("synth.cfg"));
    cfg.set("out.dir", tmp.path.string());
    return cfg;
}

} // namespace

TEST_CASE("cluster command writes labels, centers and a non-increasing energy log") {
    TempDir tmp;
    // a raster to cluster, via the simulate command
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_simulate(base_cfg(tmp)) == 0);
    }
    Config cfg = base_cfg(tmp);
    cfg.set("cluster.raster", tmp.file("raster_2.csv"));
    cfg.set("cluster.k", "4");
    cfg.set("cluster.seed", "7");
    cfg.set("out.prefix", "c4");
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_cluster(cfg) == 0);
    }
    const io::LabelRaster first = io::read_label_raster(tmp.file("c4_labels.csv"));
    CHECK(first.k == 4);

    SUBCASE("identical label raster on repeated runs") {
        const std::string before = io::read_text_file(tmp.file("c4_labels.csv"));
        QuietStdout quiet;
        REQUIRE(cli::cmd_cluster(cfg) == 0);
        CHECK(io::read_text_file(tmp.file("c4_labels.csv")) == before);
    }
    SUBCASE("k=1 labels everything alike") {
        cfg.set("cluster.k", "1");
        cfg.set("out.prefix", "c1");
        QuietStdout quiet;
        REQUIRE(cli::cmd_cluster(cfg) == 0);
        const io::LabelRaster lr = io::read_label_raster(tmp.file("c1_labels.csv"));
        for (int lab : lr.labels) CHECK(lab == 0);
    }
    SUBCASE("emitted energy log is non-increasing") {
        const std::string log = io::read_text_file(tmp.file("c4_sse.csv"));
        std::istringstream in(log);
        std::string line;
        std::getline(in, line); // header
        double prev = 0;
        bool have_prev = false;
        while (std::getline(in, line)) {
            const auto fields = io::split_csv_line(line);
            REQUIRE(fields.size() == 2);
            const double e = std::stod(fields[1]);
            if (have_prev) CHECK(e <= prev * (1.0 + 1e-12));
            prev = e;
            have_prev = true;
        }
        CHECK(have_prev);
    }
}

TEST_CASE("estimate command emits all combinations deterministically") {
    TempDir tmp;
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_simulate(base_cfg(tmp)) == 0);
    }
    Config cfg = base_cfg(tmp);
    cfg.set("estimate.population", tmp.file("observed.csv"));
    cfg.set("out.dir", tmp.file("est"));
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_estimate(cfg) == 0);
    }
    const std::string csv = io::read_text_file(tmp.file("est/combinations.csv"));
    // header + 7 combination rows for the three-frame fixture
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    CHECK(csv.find("1+2+3,") != std::string::npos);

    const std::string weights = io::read_text_file(tmp.file("est/weights.csv"));
    CHECK(weights.rfind("frame,psu,unit,pi_star_sum,raw_weight,weight\n", 0) == 0);

    SUBCASE("byte-identical outputs across runs") {
        Config cfg2 = cfg;
        cfg2.set("out.dir", tmp.file("est_again"));
        QuietStdout quiet;
        REQUIRE(cli::cmd_estimate(cfg2) == 0);
        CHECK(io::read_text_file(tmp.file("est_again/combinations.csv")) == csv);
        CHECK(io::read_text_file(tmp.file("est_again/combinations.txt")) ==
              io::read_text_file(tmp.file("est/combinations.txt")));
    }
}

TEST_CASE("reproduce command asserts means, flags the satellite SEs, exits zero") {
    TempDir tmp;
    Config cfg = base_cfg(tmp);
    cfg.set("reproduce.summary", fixture("survey_summary.csv"));
    cfg.set("reproduce.metrics", fixture("metrics_reference.csv"));
    cfg.set("out.path", "reproduction.txt");
    {
        QuietStdout quiet;
        CHECK(cli::cmd_reproduce(cfg) == 0);
    }
    const std::string report = io::read_text_file(tmp.file("reproduction.txt"));
    CHECK(report.find("DISCREPANT(se)") != std::string::npos);
    CHECK(report.find("OK") != std::string::npos);

    SUBCASE("empty summary is an error") {
        const std::string bad = tmp.file("empty.csv");
        io::write_text_file(bad,
                            "frame,label,row,N,n,Mbar,M_i,m_i,ybar_i,s2w_i,s2b,"
                            "mean_published,se_published\n");
        Config cfg2 = base_cfg(tmp);
        cfg2.set("reproduce.summary", bad);
        QuietStdout quiet;
        CHECK_THROWS_AS(cli::cmd_reproduce(cfg2), std::runtime_error);
    }
}

TEST_CASE("oracle command reports sub-1e-10 unbiasedness and is seed-stable") {
    TempDir tmp;
    Config cfg = base_cfg(tmp);
    cfg.set("oracle.instances", "grid2_shared,census_collapse");
    cfg.set("oracle.replications", "500");
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_oracle(cfg) == 0);
    }
    const std::string grid = io::read_text_file(tmp.file("oracle_grid2_shared.txt"));
    CHECK(grid.find("relative_error = 0\n") != std::string::npos);

    const std::string census = io::read_text_file(tmp.file("oracle_census_collapse.txt"));
    CHECK(census.find("exact_variance = 0 ") != std::string::npos);
    CHECK(census.find("analytic_variance = 0 ") != std::string::npos);

    SUBCASE("identical reports under a fixed seed") {
        const std::string before = io::read_text_file(tmp.file("oracle_reports.csv"));
        QuietStdout quiet;
        REQUIRE(cli::cmd_oracle(cfg) == 0);
        CHECK(io::read_text_file(tmp.file("oracle_reports.csv")) == before);
    }
}

TEST_CASE("assign command builds a population from points and label rasters") {
    TempDir tmp;
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_simulate(base_cfg(tmp)) == 0);
    }
    Config cfg = base_cfg(tmp);
    cfg.set("assign.points", tmp.file("points.csv"));
    cfg.set("assign.labels", tmp.file("labels_2.csv") + "," + tmp.file("labels_3.csv"));
    cfg.set("out.path", "assembled.csv");
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_assign(cfg) == 0);
    }
    const Population pop = io::read_population(tmp.file("assembled.csv"));
    CHECK(pop.frames.size() == 3);
    CHECK(pop.frame(2).ssu_total() == 40 * 30);
    CHECK(pop.frame(3).ssu_total() == 40 * 30);
    // every sampled point is in all three frames
    int in_all = 0;
    for (const auto& u : pop.units) {
        if (u.yield) {
            CHECK(u.memberships.size() == 3);
            ++in_all;
        }
    }
    CHECK(in_all == 48);
}

TEST_CASE("frames command tabulates cluster sizes") {
    TempDir tmp;
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_simulate(base_cfg(tmp)) == 0);
    }
    Config cfg = base_cfg(tmp);
    cfg.set("frames.labels", tmp.file("labels_2.csv"));
    cfg.set("out.path", "sizes.csv");
    {
        QuietStdout quiet;
        REQUIRE(cli::cmd_frames(cfg) == 0);
    }
    const std::string csv = io::read_text_file(tmp.file("sizes.csv"));
    CHECK(csv.rfind("file,cluster,pixels\n", 0) == 0);
    // 5 clusters in frame 2 of the bundled fixture
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
