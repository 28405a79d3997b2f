#include "mfy/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mfy::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_comment_or_blank(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t[0] == '#';
}

double parse_double(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    if (t.empty()) throw std::runtime_error("empty number in " + context);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw std::runtime_error("bad number '" + t + "' in " + context);
    }
    return v;
}

long long parse_int(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    if (t.empty()) throw std::runtime_error("empty integer in " + context);
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) {
        throw std::runtime_error("bad integer '" + t + "' in " + context);
    }
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string section_name(const std::string& line) {
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
        return trim(t.substr(1, t.size() - 2));
    }
    return "";
}

void check_header(const std::vector<std::string>& fields, const std::string& expected,
                  const std::string& path) {
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) joined += ',';
        joined += trim(fields[i]);
    }
    if (joined != expected) {
        throw std::runtime_error("'" + path + "': expected header '" + expected + "', got '" +
                                 joined + "'");
    }
}

} // namespace

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Population file

Population read_population(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);

    std::vector<UnitRecord> units;
    std::vector<FramePartition> partitions;
    std::optional<double> true_mean;

    enum class Section { none, meta, units, frame };
    Section section = Section::none;
    int current_frame_id = 0;
    // psu order within each frame follows first appearance in the file
    std::map<int, std::vector<std::pair<std::string, std::vector<std::string>>>> frame_psus;
    std::vector<int> frame_order;
    bool saw_units_header = false, saw_frame_header = false;

    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        if (is_comment_or_blank(line)) continue;
        const std::string sec = section_name(line);
        if (!sec.empty()) {
            if (sec == "units") {
                section = Section::units;
                saw_units_header = false;
            } else if (sec == "meta") {
                section = Section::meta;
            } else if (sec.rfind("frame_", 0) == 0) {
                const int fid = static_cast<int>(parse_int(sec.substr(6), path));
                section = Section::frame;
                saw_frame_header = false;
                if (!frame_psus.count(fid)) frame_order.push_back(fid);
                frame_psus[fid];
                current_frame_id = fid;
            } else {
                throw std::runtime_error("'" + path + "': unknown section [" + sec + "]");
            }
            continue;
        }
        switch (section) {
            case Section::none:
                throw std::runtime_error("'" + path + "': data before any section header");
            case Section::meta: {
                const auto eq = line.find('=');
                if (eq == std::string::npos) break;
                const std::string key = trim(line.substr(0, eq));
                const std::string val = trim(line.substr(eq + 1));
                if (key == "true_mean") true_mean = parse_double(val, path);
                break;
            }
            case Section::units: {
                const auto fields = split_csv_line(line);
                if (!saw_units_header) {
                    check_header(fields, "unit_id,x,y_coord,yield", path);
                    saw_units_header = true;
                    break;
                }
                if (fields.size() != 4) {
                    throw std::runtime_error("'" + path + "': units row needs 4 fields");
                }
                UnitRecord u;
                u.id = trim(fields[0]);
                if (u.id.empty()) throw std::runtime_error("'" + path + "': empty unit id");
                const std::string xs = trim(fields[1]), ys = trim(fields[2]);
                if (!xs.empty() && !ys.empty()) {
                    u.location = {{parse_double(xs, path), parse_double(ys, path)}};
                } else if (xs.empty() != ys.empty()) {
                    throw std::runtime_error("'" + path + "': unit '" + u.id +
                                             "' has only one coordinate");
                }
                const std::string yv = trim(fields[3]);
                if (!yv.empty()) u.yield = parse_double(yv, path);
                units.push_back(std::move(u));
                break;
            }
            case Section::frame: {
                const auto fields = split_csv_line(line);
                if (!saw_frame_header) {
                    check_header(fields, "unit_id,psu_id", path);
                    saw_frame_header = true;
                    break;
                }
                if (fields.size() != 2) {
                    throw std::runtime_error("'" + path + "': frame row needs 2 fields");
                }
                const std::string psu_id = trim(fields[1]);
                auto& psus = frame_psus[current_frame_id];
                auto it = std::find_if(psus.begin(), psus.end(),
                                       [&](const auto& p) { return p.first == psu_id; });
                if (it == psus.end()) {
                    psus.emplace_back(psu_id, std::vector<std::string>{});
                    it = std::prev(psus.end());
                }
                it->second.push_back(trim(fields[0]));
                break;
            }
        }
    }

    partitions.reserve(frame_order.size());
    for (int fid : frame_order) {
        FramePartition part;
        part.frame_id = fid;
        part.psus = std::move(frame_psus[fid]);
        partitions.push_back(std::move(part));
    }

    Population pop = build_population(std::move(units), partitions);
    pop.true_mean = true_mean;
    return pop;
}

void write_population(const Population& pop, const std::string& path) {
    std::ostringstream out;
    if (pop.true_mean) {
        out << "[meta]\n";
        out << "true_mean = " << format_full(*pop.true_mean) << "\n";
    }
    out << "[units]\n";
    out << "unit_id,x,y_coord,yield\n";
    for (const auto& u : pop.units) {
        out << u.id << ',';
        if (u.location) {
            out << format_full(u.location->first) << ',' << format_full(u.location->second);
        } else {
            out << ',';
        }
        out << ',';
        if (u.yield) out << format_full(*u.yield);
        out << '\n';
    }
    for (const auto& frame : pop.frames) {
        out << "[frame_" << frame.id << "]\n";
        out << "unit_id,psu_id\n";
        for (const auto& psu : frame.psus) {
            for (int unit : psu.units) {
                out << pop.units[static_cast<std::size_t>(unit)].id << ',' << psu.id << '\n';
            }
        }
    }
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Rasters

namespace {

Raster parse_raster_header(const std::string& line, const std::string& path) {
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
        throw std::runtime_error("'" + path +
                                 "': raster header needs "
                                 "width,height,bands,origin_x,origin_y,psize_x,psize_y");
    }
    Raster r;
    r.width = static_cast<int>(parse_int(fields[0], path));
    r.height = static_cast<int>(parse_int(fields[1], path));
    r.bands = static_cast<int>(parse_int(fields[2], path));
    r.origin_x = parse_double(fields[3], path);
    r.origin_y = parse_double(fields[4], path);
    r.psize_x = parse_double(fields[5], path);
    r.psize_y = parse_double(fields[6], path);
    if (r.width < 1 || r.height < 1 || r.bands < 1) {
        throw std::runtime_error("'" + path + "': raster header has nonpositive dimensions");
    }
    return r;
}

std::string raster_header(const Raster& r) {
    std::ostringstream out;
    out << r.width << ',' << r.height << ',' << r.bands << ',' << format_full(r.origin_x) << ','
        << format_full(r.origin_y) << ',' << format_full(r.psize_x) << ','
        << format_full(r.psize_y);
    return out.str();
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

Raster read_raster(const std::string& path) {
    if (has_suffix(path, ".bin")) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        std::string header;
        std::getline(in, header);
        Raster r = parse_raster_header(header, path);
        const std::size_t count =
            static_cast<std::size_t>(r.width) * r.height * r.bands;
        r.pixels.resize(count);
        in.read(reinterpret_cast<char*>(r.pixels.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
            throw std::runtime_error("'" + path + "': truncated binary raster");
        }
        return r;
    }

    const std::vector<std::string> lines = read_lines(path);
    std::size_t ln = 0;
    while (ln < lines.size() && is_comment_or_blank(lines[ln])) ++ln;
    if (ln == lines.size()) throw std::runtime_error("'" + path + "': empty raster file");
    Raster r = parse_raster_header(lines[ln++], path);
    r.pixels.reserve(static_cast<std::size_t>(r.width) * r.height * r.bands);
    for (; ln < lines.size(); ++ln) {
        if (is_comment_or_blank(lines[ln])) continue;
        for (const auto& f : split_csv_line(lines[ln])) {
            r.pixels.push_back(parse_double(f, path));
        }
    }
    if (r.pixels.size() != static_cast<std::size_t>(r.width) * r.height * r.bands) {
        throw std::runtime_error("'" + path + "': raster has " + std::to_string(r.pixels.size()) +
                                 " values, header promises " +
                                 std::to_string(static_cast<std::size_t>(r.width) * r.height *
                                                r.bands));
    }
    return r;
}

void write_raster_text(const Raster& r, const std::string& path) {
    std::ostringstream out;
    out << raster_header(r) << '\n';
    for (int row = 0; row < r.height; ++row) {
        const double* base =
            r.pixels.data() + static_cast<std::size_t>(row) * r.width * r.bands;
        for (int i = 0; i < r.width * r.bands; ++i) {
            if (i) out << ',';
            out << format_full(base[i]);
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_raster_binary(const Raster& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << raster_header(r) << '\n';
    // Little-endian float64, row-major, band-interleaved.
    out.write(reinterpret_cast<const char*>(r.pixels.data()),
              static_cast<std::streamsize>(r.pixels.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_label_raster(const Raster& georef, std::span<const int> labels,
                        const std::string& path) {
    if (static_cast<int>(labels.size()) != georef.pixel_count()) {
        throw std::invalid_argument("label count does not match the raster");
    }
    Raster hdr = georef;
    hdr.bands = 1;
    std::ostringstream out;
    out << raster_header(hdr) << '\n';
    for (int row = 0; row < georef.height; ++row) {
        for (int col = 0; col < georef.width; ++col) {
            if (col) out << ',';
            out << labels[static_cast<std::size_t>(row) * georef.width + col] + 1;
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

LabelRaster read_label_raster(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::size_t ln = 0;
    while (ln < lines.size() && is_comment_or_blank(lines[ln])) ++ln;
    if (ln == lines.size()) throw std::runtime_error("'" + path + "': empty label raster");
    LabelRaster lr;
    lr.georef = parse_raster_header(lines[ln++], path);
    if (lr.georef.bands != 1) {
        throw std::runtime_error("'" + path + "': label raster must have exactly one band");
    }
    for (; ln < lines.size(); ++ln) {
        if (is_comment_or_blank(lines[ln])) continue;
        for (const auto& f : split_csv_line(lines[ln])) {
            const int label = static_cast<int>(parse_int(f, path));
            if (label < 1) throw std::runtime_error("'" + path + "': labels are 1-based");
            lr.labels.push_back(label - 1);
            lr.k = std::max(lr.k, label);
        }
    }
    if (static_cast<int>(lr.labels.size()) != lr.georef.pixel_count()) {
        throw std::runtime_error("'" + path + "': label count does not match the header");
    }
    // keep the georef a well-formed one-band raster
    lr.georef.pixels.assign(lr.labels.begin(), lr.labels.end());
    return lr;
}

// ---------------------------------------------------------------------------
// Points

std::vector<PointsRow> read_points(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<PointsRow> rows;
    bool saw_header = false;
    for (const auto& line : lines) {
        if (is_comment_or_blank(line)) continue;
        const auto fields = split_csv_line(line);
        if (!saw_header) {
            check_header(fields, "unit_id,x,y,yield,list_psu_id", path);
            saw_header = true;
            continue;
        }
        if (fields.size() != 5) throw std::runtime_error("'" + path + "': points row needs 5 fields");
        PointsRow r;
        r.unit_id = trim(fields[0]);
        r.x = parse_double(fields[1], path);
        r.y = parse_double(fields[2], path);
        r.yield = parse_double(fields[3], path);
        r.list_psu_id = trim(fields[4]);
        if (r.yield < 0) throw std::runtime_error("'" + path + "': negative yield for '" + r.unit_id + "'");
        rows.push_back(std::move(r));
    }
    // Unique ids.
    std::vector<std::string> ids;
    for (const auto& r : rows) ids.push_back(r.unit_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw std::runtime_error("'" + path + "': duplicate unit ids");
    }
    return rows;
}

void write_points(std::span<const PointsRow> rows, const std::string& path) {
    std::ostringstream out;
    out << "unit_id,x,y,yield,list_psu_id\n";
    for (const auto& r : rows) {
        out << r.unit_id << ',' << format_full(r.x) << ',' << format_full(r.y) << ','
            << format_full(r.yield) << ',' << r.list_psu_id << '\n';
    }
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Survey summary fixture

std::vector<SummaryFrame> read_summary(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<SummaryFrame> frames;
    std::map<int, std::size_t> index;
    std::map<int, int> declared_n;
    bool saw_header = false;
    for (const auto& line : lines) {
        if (is_comment_or_blank(line)) continue;
        const auto fields = split_csv_line(line);
        if (!saw_header) {
            check_header(fields,
                         "frame,label,row,N,n,Mbar,M_i,m_i,ybar_i,s2w_i,s2b,"
                         "mean_published,se_published",
                         path);
            saw_header = true;
            continue;
        }
        if (fields.size() != 13) {
            throw std::runtime_error("'" + path + "': summary row needs 13 fields");
        }
        const int fid = static_cast<int>(parse_int(fields[0], path));
        const std::string kind = trim(fields[2]);
        if (!index.count(fid)) {
            index[fid] = frames.size();
            frames.push_back(SummaryFrame{});
            frames.back().frame_id = fid;
        }
        SummaryFrame& sf = frames[index[fid]];
        if (kind == "frame") {
            sf.label = trim(fields[1]);
            sf.summary.N = parse_double(fields[3], path);
            sf.summary.Mbar = parse_double(fields[5], path);
            sf.summary.s2b = parse_double(fields[10], path);
            sf.mean_published = parse_double(fields[11], path);
            sf.se_published = parse_double(fields[12], path);
            // field 4 (n) is cross-checked against the psu rows below
            const long long n = parse_int(fields[4], path);
            sf.summary.psus.reserve(static_cast<std::size_t>(n));
            declared_n[fid] = static_cast<int>(n);
        } else if (kind == "psu") {
            SfPsuRow row;
            row.M = parse_double(fields[6], path);
            row.m = parse_double(fields[7], path);
            row.ybar = parse_double(fields[8], path);
            row.s2w = parse_double(fields[9], path);
            sf.summary.psus.push_back(row);
        } else {
            throw std::runtime_error("'" + path + "': summary row kind must be frame or psu");
        }
    }
    if (frames.empty()) throw std::runtime_error("'" + path + "': empty summary");
    for (const auto& sf : frames) {
        if (sf.summary.psus.empty()) {
            throw std::runtime_error("'" + path + "': frame " + std::to_string(sf.frame_id) +
                                     " has no psu rows");
        }
        const int n = declared_n.count(sf.frame_id) ? declared_n[sf.frame_id] : -1;
        if (n != static_cast<int>(sf.summary.psus.size())) {
            throw std::runtime_error("'" + path + "': frame " + std::to_string(sf.frame_id) +
                                     " declares n=" + std::to_string(n) + " but has " +
                                     std::to_string(sf.summary.psus.size()) + " psu rows");
        }
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Metrics reference fixture

std::vector<MetricsRow> read_metrics_reference(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<MetricsRow> rows;
    bool saw_header = false;
    for (const auto& line : lines) {
        if (is_comment_or_blank(line)) continue;
        const auto fields = split_csv_line(line);
        if (!saw_header) {
            check_header(fields, "combination,mean,se,re_published,pd_published", path);
            saw_header = true;
            continue;
        }
        if (fields.size() != 5) throw std::runtime_error("'" + path + "': metrics row needs 5 fields");
        MetricsRow r;
        r.combination = trim(fields[0]);
        r.mean = parse_double(fields[1], path);
        r.se = parse_double(fields[2], path);
        r.re_published = parse_double(fields[3], path);
        r.pd_published = parse_double(fields[4], path);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("'" + path + "': empty metrics reference");
    return rows;
}

std::vector<HandWeightRow> read_hand_weights(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<HandWeightRow> rows;
    bool saw_header = false;
    for (const auto& line : lines) {
        if (is_comment_or_blank(line)) continue;
        const auto fields = split_csv_line(line);
        if (!saw_header) {
            check_header(fields, "frame,psu,unit,pi_star_sum,raw_weight,weight", path);
            saw_header = true;
            continue;
        }
        if (fields.size() != 6) throw std::runtime_error("'" + path + "': weight row needs 6 fields");
        HandWeightRow r;
        r.frame_id = static_cast<int>(parse_int(fields[0], path));
        r.psu_id = trim(fields[1]);
        r.unit_id = trim(fields[2]);
        r.pi_sum = parse_double(fields[3], path);
        r.raw = parse_double(fields[4], path);
        r.weight = parse_double(fields[5], path);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("'" + path + "': empty hand-weight fixture");
    return rows;
}

// ---------------------------------------------------------------------------
// Result tables

void write_weight_table(const Population& pop, const WeightTable& table,
                        const std::string& path) {
    std::ostringstream out;
    out << "frame,psu,unit,pi_star_sum,raw_weight,weight\n";
    for (const auto& e : table.entries) {
        const Frame& frame = pop.frame(e.frame_id);
        out << e.frame_id << ',' << frame.psus[static_cast<std::size_t>(e.psu_index)].id << ','
            << pop.units[static_cast<std::size_t>(e.unit)].id << ',' << format_full(e.pi_sum)
            << ',' << format_full(e.raw) << ',' << format_full(e.w) << '\n';
    }
    write_text_file(path, out.str());
}

void write_comparison_csv(const ComparisonReport& report, const std::string& path) {
    std::ostringstream out;
    out << "combination,mean,se,re,pd\n";
    for (const auto& r : report.rows) {
        out << r.combination << ',' << format_full(r.mean) << ',' << format_full(r.se) << ','
            << format_full(r.re) << ',' << format_full(r.pd) << '\n';
    }
    write_text_file(path, out.str());
}

std::string format_comparison_text(const ComparisonReport& report) {
    auto criteria = [](std::size_t k) -> std::string {
        if (k == 1) return "Single Frame";
        if (k == 2) return "Dual Frame";
        return "Multiple-Frame";
    };
    std::ostringstream out;
    out << "Comparison of average yield by frame combination (reference yield "
        << format_fixed(report.reference_yield, 0) << " kg/ha)\n\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %-14s %16s %14s %10s %14s\n", "Criteria",
                  "Combination", "Avg yield kg/ha", "S.E. kg/ha", "R.E.", "% Deviation");
    out << line;
    for (const auto& r : report.rows) {
        if (!r.ok()) {
            std::snprintf(line, sizeof(line), "%-16s %-14s     failed: %s\n",
                          criteria(r.frame_ids.size()).c_str(), r.combination.c_str(),
                          r.error.c_str());
            out << line;
            continue;
        }
        std::snprintf(line, sizeof(line), "%-16s %-14s %16s %14s %10s %14s\n",
                      criteria(r.frame_ids.size()).c_str(), r.combination.c_str(),
                      format_fixed(r.mean, 2).c_str(), format_fixed(r.se, 3).c_str(),
                      format_fixed(r.re, 5).c_str(), format_fixed(r.pd, 5).c_str());
        out << line;
    }
    return out.str();
}

std::string format_oracle_report(const OracleReport& rep) {
    std::ostringstream out;
    out << "instance = " << rep.instance << "\n";
    out << "seed = " << rep.seed << "\n";
    if (rep.replications) {
        out << "replications = " << *rep.replications << "\n";
    } else {
        out << "draws = " << rep.draws << "\n";
    }
    out << "population_mean = " << format_full(rep.population_mean) << " kg/ha\n";
    out << "expected_estimate = " << format_full(rep.expected_estimate) << " kg/ha\n";
    out << "relative_error = " << format_full(rep.relative_error) << "\n";
    if (!rep.replications) {
        out << "exact_variance = " << format_full(rep.exact_variance) << " (kg/ha)^2\n";
    }
    if (rep.empirical_variance) {
        out << "empirical_variance = " << format_full(*rep.empirical_variance) << " (kg/ha)^2\n";
    }
    if (rep.sem) out << "sem = " << format_full(*rep.sem) << " kg/ha\n";
    if (rep.analytic_variance) {
        out << "analytic_variance = " << format_full(*rep.analytic_variance) << " (kg/ha)^2\n";
    }
    if (rep.var_est_mean) {
        out << "var_est_mean = " << format_full(*rep.var_est_mean) << " (kg/ha)^2\n";
    }
    out << "var_est_defined_mass = " << format_full(rep.var_est_defined_mass) << "\n";
    if (rep.analytic_over_exact) {
        out << "analytic_over_exact = " << format_full(*rep.analytic_over_exact) << "\n";
    }
    if (rep.var_est_over_exact) {
        out << "var_est_over_exact = " << format_full(*rep.var_est_over_exact) << "\n";
    }
    return out.str();
}

std::string oracle_report_csv_header() {
    return "instance,seed,draws,replications,population_mean,expected_estimate,relative_error,"
           "exact_variance,empirical_variance,sem,analytic_variance,var_est_mean,"
           "var_est_defined_mass,analytic_over_exact,var_est_over_exact";
}

std::string oracle_report_csv_row(const OracleReport& rep) {
    auto opt = [](const std::optional<double>& v) {
        return v ? format_full(*v) : std::string();
    };
    std::ostringstream out;
    out << rep.instance << ',' << rep.seed << ',' << rep.draws << ','
        << (rep.replications ? std::to_string(*rep.replications) : std::string()) << ','
        << format_full(rep.population_mean) << ',' << format_full(rep.expected_estimate) << ','
        << format_full(rep.relative_error) << ','
        << (rep.replications ? std::string() : format_full(rep.exact_variance)) << ','
        << opt(rep.empirical_variance) << ',' << opt(rep.sem) << ','
        << opt(rep.analytic_variance) << ',' << opt(rep.var_est_mean) << ','
        << format_full(rep.var_est_defined_mass) << ',' << opt(rep.analytic_over_exact) << ','
        << opt(rep.var_est_over_exact);
    return out.str();
}

} // namespace mfy::io
