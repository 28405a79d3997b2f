#include "mfy/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "mfy/io.hpp"

namespace fs = std::filesystem;

namespace mfy::cli {

namespace {

WeightRule rule_from(const Config& cfg) {
    const std::string r = cfg.get_str("estimate.rule", "pi_star");
    if (r == "pi_star") return WeightRule::pi_star;
    if (r == "plain_pi") return WeightRule::plain_pi;
    throw std::runtime_error("estimate.rule must be pi_star or plain_pi, got '" + r + "'");
}

FpcForm fpc_from(const Config& cfg) {
    const std::string f = cfg.get_str("estimate.fpc", "derived");
    if (f == "derived") return FpcForm::derived;
    if (f == "printed") return FpcForm::printed;
    throw std::runtime_error("estimate.fpc must be derived or printed, got '" + f + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

fs::path out_dir(const Config& cfg) {
    fs::path dir = cfg.get_str("out.dir", ".");
    fs::create_directories(dir);
    return dir;
}

// Per-frame summary in the layout of the worked survey table: design counts,
// realized allocation, per-psu means, and the conventional two-stage
// single-frame estimate.
std::string format_frame_summaries(const Population& pop, const SampleDraw& draw) {
    std::ostringstream out;
    out << "Per-frame sample summary\n";
    char line[200];
    for (const auto& frame : pop.frames) {
        const FrameSample& fs = draw.frame(frame.id);
        const SfSummary s = summarize_frame_sample(pop, frame, fs);
        std::snprintf(line, sizeof(line),
                      "frame %d: N=%d  n=%d  M0=%lld  Mbar=%.2f  s2b=%.6g\n", frame.id,
                      frame.psu_count(), fs.n(), frame.ssu_total(), frame.mbar(), s.s2b);
        out << line;
        for (std::size_t i = 0; i < fs.psus.size(); ++i) {
            const auto& p = fs.psus[i];
            const auto& row = s.psus[i];
            std::snprintf(line, sizeof(line),
                          "  psu %-6s M=%-6.0f m=%-4.0f ybar=%-10.2f s2w=%.6g\n",
                          frame.psus[static_cast<std::size_t>(p.psu_index)].id.c_str(), row.M,
                          row.m, row.ybar, row.s2w);
            out << line;
        }
        try {
            const SfEstimate est = sf_from_summary(s);
            std::snprintf(line, sizeof(line),
                          "  two-stage single-frame estimate: %.2f kg/ha  SE %.2f kg/ha\n",
                          est.mean, est.se);
            out << line;
        } catch (const std::exception& ex) {
            out << "  two-stage single-frame estimate unavailable: " << ex.what() << '\n';
        }
    }
    return out.str();
}

} // namespace

int cmd_cluster(const Config& cfg) {
    const std::string raster_path = cfg.get_str("cluster.raster");
    const Raster raster = io::read_raster(raster_path);

    KmeansOptions opt;
    opt.epsilon = cfg.get_double("cluster.epsilon", 1e-6);
    opt.max_iter = static_cast<int>(cfg.get_int("cluster.max_iter", 100));
    opt.seed = cfg.get_u64("cluster.seed", cfg.get_u64("seed", 0));
    opt.standardize = cfg.get_bool("cluster.standardize", false);
    opt.greedy_spread_init = cfg.get_bool("cluster.greedy_spread", false);
    opt.parallel = cfg.get_bool("cluster.parallel", true);
    const int k = static_cast<int>(cfg.get_int("cluster.k"));

    const ClusterModel model = kmeans(raster, k, opt);

    const fs::path dir = out_dir(cfg);
    const std::string prefix = cfg.get_str("out.prefix", "cluster");
    io::write_label_raster(raster, model.assignment, (dir / (prefix + "_labels.csv")).string());

    std::ostringstream centers;
    centers << "cluster,pixels";
    for (int b = 0; b < model.bands; ++b) centers << ",b" << (b + 1);
    centers << '\n';
    for (int c = 0; c < model.k; ++c) {
        centers << (c + 1) << ',' << model.sizes[c];
        for (int b = 0; b < model.bands; ++b) {
            centers << ',' << io::format_full(model.centers[static_cast<std::size_t>(c) * model.bands + b]);
        }
        centers << '\n';
    }
    io::write_text_file((dir / (prefix + "_centers.csv")).string(), centers.str());

    std::ostringstream sselog;
    sselog << "iteration,sse\n";
    for (std::size_t i = 0; i < model.sse_log.size(); ++i) {
        sselog << (i + 1) << ',' << io::format_full(model.sse_log[i]) << '\n';
    }
    io::write_text_file((dir / (prefix + "_sse.csv")).string(), sselog.str());

    std::cout << "clustered " << raster.pixel_count() << " pixels into " << model.k
              << " clusters in " << model.iterations << " passes, final energy "
              << io::format_full(model.sse) << "\n";
    return 0;
}

int cmd_frames(const Config& cfg) {
    const std::vector<std::string> label_paths = split_list(cfg.get_str("frames.labels"));
    if (label_paths.empty()) throw std::runtime_error("frames.labels names no files");
    std::ostringstream out;
    out << "file,cluster,pixels\n";
    for (const auto& path : label_paths) {
        const io::LabelRaster lr = io::read_label_raster(path);
        std::vector<long long> sizes(static_cast<std::size_t>(lr.k), 0);
        for (int lab : lr.labels) ++sizes[lab];
        for (int c = 0; c < lr.k; ++c) {
            out << path << ',' << (c + 1) << ',' << sizes[c] << '\n';
        }
    }
    const fs::path dir = out_dir(cfg);
    const std::string path = (dir / cfg.get_str("out.path", "frames.csv")).string();
    io::write_text_file(path, out.str());
    std::cout << "wrote cluster size table to " << path << "\n";
    return 0;
}

int cmd_assign(const Config& cfg) {
    const std::vector<io::PointsRow> points = io::read_points(cfg.get_str("assign.points"));
    const std::vector<std::string> label_paths = split_list(cfg.get_str("assign.labels"));

    std::vector<UnitRecord> units;
    FramePartition list_part;
    list_part.frame_id = 1;
    for (const auto& p : points) {
        UnitRecord u;
        u.id = p.unit_id;
        u.location = {{p.x, p.y}};
        u.yield = p.yield;
        auto it = std::find_if(list_part.psus.begin(), list_part.psus.end(),
                               [&](const auto& psu) { return psu.first == p.list_psu_id; });
        if (it == list_part.psus.end()) {
            list_part.psus.emplace_back(p.list_psu_id, std::vector<std::string>{});
            it = std::prev(list_part.psus.end());
        }
        it->second.push_back(p.unit_id);
        units.push_back(std::move(u));
    }
    Population pop = build_population(std::move(units), {list_part});

    for (std::size_t i = 0; i < label_paths.size(); ++i) {
        const io::LabelRaster lr = io::read_label_raster(label_paths[i]);
        build_satellite_frame(pop, lr.georef, lr.labels, lr.k, static_cast<int>(i) + 2);
    }

    const fs::path dir = out_dir(cfg);
    const std::string path = (dir / cfg.get_str("out.path", "population.csv")).string();
    io::write_population(pop, path);
    std::cout << "assigned " << points.size() << " points across " << pop.frames.size()
              << " frames; population written to " << path << "\n";
    return 0;
}

int cmd_estimate(const Config& cfg) {
    const Population pop = io::read_population(cfg.get_str("estimate.population"));
    const DesignSpec design = design_from_config(cfg, pop);
    const double reference = cfg.get_double("estimate.reference_yield", 3660.0);
    const WeightRule rule = rule_from(cfg);
    const FpcForm fpc = fpc_from(cfg);

    // The realized sample: units carrying a yield, or an explicit id list.
    std::vector<int> shared;
    if (cfg.has("estimate.shared")) {
        for (const auto& line : split_list(cfg.get_str("estimate.shared"))) {
            const int ui = pop.unit_index(line);
            if (ui < 0) throw std::runtime_error("estimate.shared names unknown unit '" + line + "'");
            shared.push_back(ui);
        }
    } else {
        for (int i = 0; i < static_cast<int>(pop.units.size()); ++i) {
            if (pop.units[static_cast<std::size_t>(i)].yield) shared.push_back(i);
        }
    }
    std::sort(shared.begin(), shared.end());

    const SampleDraw draw = impose_shared_sample(pop, shared);
    const fs::path dir = out_dir(cfg);

    const WeightTable weights = compute_weights(pop, draw, design, rule);
    io::write_weight_table(pop, weights, (dir / "weights.csv").string());

    const ComparisonReport report = compare_combinations(pop, draw, design, reference, rule, fpc);
    io::write_comparison_csv(report, (dir / "combinations.csv").string());

    std::ostringstream text;
    text << format_frame_summaries(pop, draw);
    text << "\n" << io::format_comparison_text(report);
    text << "\nDomain census (frame set: units)\n";
    for (const auto& [key, count] : domain_census(pop)) {
        text << "  {";
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (i) text << ',';
            text << key[i];
        }
        text << "}: " << count << '\n';
    }
    io::write_text_file((dir / "combinations.txt").string(), text.str());
    std::cout << text.str();
    return 0;
}

int cmd_oracle(const Config& cfg) {
    const fs::path dir = out_dir(cfg);
    const std::size_t cap = static_cast<std::size_t>(cfg.get_int("oracle.cap", 1000000));

    std::vector<std::string> names;
    const std::string wanted = cfg.get_str("oracle.instances", "all");
    if (wanted == "all") {
        names = desk_instance_names();
    } else {
        names = split_list(wanted);
    }

    std::ostringstream csv;
    csv << io::oracle_report_csv_header() << '\n';
    bool all_ok = true;

    for (const auto& name : names) {
        const DeskInstance inst = make_desk_instance(name);
        OracleReport rep;
        try {
            rep = unbiasedness_oracle(inst.population, inst.design, cap);
        } catch (const std::exception& ex) {
            throw std::runtime_error("instance '" + name + "': " + ex.what());
        }
        rep.instance = name;
        io::write_text_file((dir / ("oracle_" + name + ".txt")).string(),
                            io::format_oracle_report(rep));
        csv << io::oracle_report_csv_row(rep) << '\n';
        std::printf("%-20s draws=%-8zu rel_err=%.3e exact_var=%.6g\n", name.c_str(), rep.draws,
                    rep.relative_error, rep.exact_variance);
    }

    const std::size_t replications =
        static_cast<std::size_t>(cfg.get_int("oracle.replications", 100000));
    if (replications >= 2) {
        const SynthSpec spec = synth_from_config(cfg);
        const SynthResult synth = generate_population(spec);
        OracleReport rep = monte_carlo(synth.population, synth.design, replications,
                                       cfg.get_u64("seed", spec.seed));
        rep.instance = "synthetic_mc";
        io::write_text_file((dir / "oracle_synthetic_mc.txt").string(),
                            io::format_oracle_report(rep));
        csv << io::oracle_report_csv_row(rep) << '\n';
        const double z = (rep.expected_estimate - rep.population_mean) / *rep.sem;
        std::printf("%-20s R=%-8zu rel_err=%.3e z=%.2f\n", "synthetic_mc", replications,
                    rep.relative_error, z);
        if (std::abs(z) > 3.0) all_ok = false;
    }

    io::write_text_file((dir / "oracle_reports.csv").string(), csv.str());
    return all_ok ? 0 : 1;
}

int cmd_simulate(const Config& cfg) {
    const SynthSpec spec = synth_from_config(cfg);
    const SynthResult synth = generate_population(spec);
    const fs::path dir = out_dir(cfg);

    io::write_population(synth.population, (dir / "population.csv").string());

    // Survey view: the drawn shared sample keeps its yields, everything else
    // is blanked, mirroring field data where only visited plots are measured.
    const SampleDraw draw = draw_joint(synth.population, synth.design, spec.seed);
    const std::vector<int> sampled = draw.distinct_units();
    Population observed = synth.population;
    observed.true_mean.reset();
    for (int i = 0; i < static_cast<int>(observed.units.size()); ++i) {
        if (!std::binary_search(sampled.begin(), sampled.end(), i)) {
            observed.units[static_cast<std::size_t>(i)].yield.reset();
        }
    }
    io::write_population(observed, (dir / "observed.csv").string());

    std::vector<io::PointsRow> rows;
    const Frame& list = synth.population.frame(1);
    for (int ui : sampled) {
        const UnitRecord& u = synth.population.units[static_cast<std::size_t>(ui)];
        io::PointsRow r;
        r.unit_id = u.id;
        r.x = u.location->first;
        r.y = u.location->second;
        r.yield = *u.yield;
        r.list_psu_id = list.psus[static_cast<std::size_t>(u.memberships.at(1))].id;
        rows.push_back(std::move(r));
    }
    io::write_points(rows, (dir / "points.csv").string());

    for (std::size_t s = 0; s < synth.rasters.size(); ++s) {
        const int fid = static_cast<int>(s) + 2;
        io::write_raster_text(synth.rasters[s], (dir / ("raster_" + std::to_string(fid) + ".csv")).string());
        io::write_label_raster(synth.rasters[s], synth.models[s].assignment,
                               (dir / ("labels_" + std::to_string(fid) + ".csv")).string());
    }

    std::cout << "synthetic population: " << synth.population.units.size() << " units, "
              << synth.population.frames.size() << " frames, true mean "
              << io::format_full(*synth.population.true_mean) << " kg/ha; sample of "
              << sampled.size() << " units written to " << dir.string() << "\n";
    return 0;
}

int cmd_reproduce(const Config& cfg) {
    const std::vector<io::SummaryFrame> frames = io::read_summary(cfg.get_str("reproduce.summary"));
    // Flags, not failures: a recomputed figure more than 5% from the published
    // one is reported DISCREPANT. Means must reproduce within 1%.
    constexpr double kFlagTol = 0.05;
    constexpr double kMeanTol = 0.01;

    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof(line), "%-3s %-8s %12s %12s %7s %12s %12s %7s  %s\n", "id",
                  "label", "mean", "published", "dev%", "se", "published", "dev%", "status");
    out << line;

    bool mean_failed = false;
    for (const auto& sf : frames) {
        const SfEstimate est = sf_from_summary(sf.summary);
        const double mean_dev = std::abs(est.mean / sf.mean_published - 1.0);
        const double se_dev = std::abs(est.se / sf.se_published - 1.0);
        std::string status = "OK";
        if (se_dev > kFlagTol) status = "DISCREPANT(se)";
        if (mean_dev > kFlagTol) status = "DISCREPANT(mean)";
        if (mean_dev > kMeanTol) mean_failed = true;
        std::snprintf(line, sizeof(line), "%-3d %-8s %12.2f %12.0f %7.3f %12.2f %12.0f %7.3f  %s\n",
                      sf.frame_id, sf.label.c_str(), est.mean, sf.mean_published, 100 * mean_dev,
                      est.se, sf.se_published, 100 * se_dev, status.c_str());
        out << line;
    }

    bool metrics_failed = false;
    if (cfg.has("reproduce.metrics")) {
        const auto rows = io::read_metrics_reference(cfg.get_str("reproduce.metrics"));
        const double reference = cfg.get_double("estimate.reference_yield", 3660.0);
        std::vector<double> ses;
        for (const auto& r : rows) ses.push_back(r.se);
        const std::vector<double> res = relative_efficiency(ses);
        out << "\nMetric arithmetic from the published means and standard errors\n";
        std::snprintf(line, sizeof(line), "%-22s %10s %10s %10s %10s %10s %10s\n", "combination",
                      "re", "published", "|diff|", "pd", "published", "|diff|");
        out << line;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double pd = percentage_deviation(rows[i].mean, reference);
            const double re_diff = std::abs(res[i] - rows[i].re_published);
            const double pd_diff = std::abs(pd - rows[i].pd_published);
            if (re_diff > 1e-4 || pd_diff > 1e-3) metrics_failed = true;
            std::snprintf(line, sizeof(line), "%-22s %10.5f %10.5f %10.2e %10.5f %10.5f %10.2e\n",
                          rows[i].combination.c_str(), res[i], rows[i].re_published, re_diff, pd,
                          rows[i].pd_published, pd_diff);
            out << line;
        }
    }

    if (cfg.has("out.path")) {
        const fs::path dir = out_dir(cfg);
        io::write_text_file((dir / cfg.get_str("out.path")).string(), out.str());
    }
    std::cout << out.str();
    if (mean_failed) std::cerr << "error: a recomputed mean missed its published value by more than 1%\n";
    if (metrics_failed) std::cerr << "error: metric arithmetic missed the published values\n";
    return (mean_failed || metrics_failed) ? 1 : 0;
}

namespace {

void usage() {
    std::cout <<
        "usage: mfyield <command> [--config FILE] [--KEY=VALUE ...]\n"
        "\n"
        "commands:\n"
        "  cluster    k-means a raster: --cluster.raster FILE --cluster.k K [--cluster.epsilon E]\n"
        "  frames     cluster size table: --frames.labels FILE[,FILE...]\n"
        "  assign     points + label rasters -> population: --assign.points FILE --assign.labels FILES\n"
        "  estimate   combination report: --estimate.population FILE [--estimate.reference_yield Y]\n"
        "  oracle     enumeration + monte-carlo verification reports [--oracle.instances NAMES]\n"
        "  simulate   write a synthetic population, rasters, labels and points [--synth.* ...]\n"
        "  reproduce  recompute a bundled survey summary: --reproduce.summary FILE\n"
        "\n"
        "Every config key doubles as a --key=value flag; --config loads a sectioned\n"
        "key-value file first, flags override it.\n";
}

} // namespace

int run(int argc, char** argv) {
    if (argc < 2) {
        usage();
        return 2;
    }
    const std::string command = argv[1];
    if (command == "help" || command == "--help" || command == "-h") {
        usage();
        return 0;
    }

    try {
        Config cfg;
        // --config first, remaining flags override in order.
        std::vector<std::pair<std::string, std::string>> overrides;
        for (int i = 2; i < argc; ++i) {
            std::string arg = argv[i];
            if (arg.rfind("--", 0) != 0) {
                throw std::runtime_error("unexpected argument '" + arg + "' (flags are --key=value)");
            }
            arg = arg.substr(2);
            std::string key, value;
            const auto eq = arg.find('=');
            if (eq != std::string::npos) {
                key = arg.substr(0, eq);
                value = arg.substr(eq + 1);
            } else {
                key = arg;
                if (i + 1 >= argc) throw std::runtime_error("flag --" + key + " needs a value");
                value = argv[++i];
            }
            if (key == "config") {
                cfg = Config::parse_file(value);
            } else {
                overrides.emplace_back(key, value);
            }
        }
        for (const auto& [k, v] : overrides) cfg.set(k, v);

        if (command == "cluster") return cmd_cluster(cfg);
        if (command == "frames") return cmd_frames(cfg);
        if (command == "assign") return cmd_assign(cfg);
        if (command == "estimate") return cmd_estimate(cfg);
        if (command == "oracle") return cmd_oracle(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "reproduce") return cmd_reproduce(cfg);
        std::cerr << "unknown command '" << command << "'\n";
        usage();
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

} // namespace mfy::cli
