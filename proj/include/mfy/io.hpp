#pragma once
// File formats. Everything is deterministic text (or an equivalent flat
// binary for rasters): identical inputs produce byte-identical outputs.
//
//   population  sectioned CSV: [units] unit_id,x,y_coord,yield rows, then one
//               [frame_<a>] table of unit_id,psu_id rows per frame
//   raster      header `width,height,bands,origin_x,origin_y,psize_x,psize_y`
//               then comma-separated band rows; `.bin` variant stores the
//               same header line followed by little-endian float64 pixels
//   labels      raster header with bands=1 and one integer cluster id per cell
//   points      CSV unit_id,x,y,yield,list_psu_id
//   summary     survey summary: a frame row and per-psu rows, columns
//               N,n,Mbar,M_i,m_i,ybar_i,s2w_i,s2b plus published references
//   weights     CSV frame,psu,unit,pi_star_sum,raw_weight,weight
//   comparison  CSV combination,mean,se,re,pd plus an aligned text table
//   oracle      flat key = value block plus a machine-readable CSV row

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfy/cluster.hpp"
#include "mfy/estimate.hpp"
#include "mfy/frame_model.hpp"
#include "mfy/simulate.hpp"
#include "mfy/weights.hpp"

namespace mfy::io {

// Full-precision number formatting (round-trip safe, >= 12 significant digits).
std::string format_full(double v);
std::string format_fixed(double v, int decimals);

Population read_population(const std::string& path);
void write_population(const Population& pop, const std::string& path);

Raster read_raster(const std::string& path); // text, or binary for `.bin`
void write_raster_text(const Raster& r, const std::string& path);
void write_raster_binary(const Raster& r, const std::string& path);

void write_label_raster(const Raster& georef, std::span<const int> labels,
                        const std::string& path); // labels stored 1-based
struct LabelRaster {
    Raster georef;           // header fields only, bands = 1
    std::vector<int> labels; // 0-based
    int k = 0;               // max label
};
LabelRaster read_label_raster(const std::string& path);

struct PointsRow {
    std::string unit_id;
    double x = 0, y = 0;
    double yield = 0;
    std::string list_psu_id;
};
std::vector<PointsRow> read_points(const std::string& path);
void write_points(std::span<const PointsRow> rows, const std::string& path);

struct SummaryFrame {
    int frame_id = 0;
    std::string label;
    SfSummary summary;
    double mean_published = 0;
    double se_published = 0;
};
std::vector<SummaryFrame> read_summary(const std::string& path);

struct MetricsRow {
    std::string combination;
    double mean = 0, se = 0;
    double re_published = 0, pd_published = 0;
};
std::vector<MetricsRow> read_metrics_reference(const std::string& path);

struct HandWeightRow {
    int frame_id = 0;
    std::string psu_id;
    std::string unit_id;
    double pi_sum = 0, raw = 0, weight = 0;
};
std::vector<HandWeightRow> read_hand_weights(const std::string& path);

void write_weight_table(const Population& pop, const WeightTable& table,
                        const std::string& path);

void write_comparison_csv(const ComparisonReport& report, const std::string& path);
std::string format_comparison_text(const ComparisonReport& report);

std::string format_oracle_report(const OracleReport& report);          // key = value block
std::string oracle_report_csv_header();
std::string oracle_report_csv_row(const OracleReport& report);

// Small shared helpers.
std::vector<std::string> split_csv_line(const std::string& line);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace mfy::io
