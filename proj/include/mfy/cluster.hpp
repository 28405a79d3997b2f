#pragma once
// Satellite-frame factory: k-means clustering of multiband rasters,
// georeferenced point-to-pixel lookup, and frame construction where clusters
// are the primary units and pixels the second-stage units.
//
// The assignment / center-update / SSE kernels run either serially or over
// OpenMP with a fixed blocked reduction order; both paths produce
// bit-identical models for a given seed.

#include <cstdint>
#include <span>
#include <vector>

#include "mfy/frame_model.hpp"

namespace mfy {

struct Raster {
    int width = 0;
    int height = 0;
    int bands = 0;
    double origin_x = 0, origin_y = 0; // world coordinate of pixel (row 0, col 0) corner
    double psize_x = 1, psize_y = 1;   // cell size, > 0
    std::vector<double> pixels;        // row-major, band-interleaved

    int pixel_count() const { return width * height; }
    std::span<const double> pixel(int index) const {
        return {pixels.data() + static_cast<std::size_t>(index) * bands,
                static_cast<std::size_t>(bands)};
    }
};

struct KmeansOptions {
    double epsilon = 1e-6; // max center displacement termination (band units)
    int max_iter = 100;
    std::uint64_t seed = 0;
    bool standardize = false;       // per-band z-scoring before clustering
    bool greedy_spread_init = false; // farthest-point spread instead of random pixels
    bool parallel = true;            // OpenMP kernels; serial reference when false
};

struct ClusterModel {
    int k = 0;
    int bands = 0;
    std::vector<double> centers;    // k * bands, in clustering space
    std::vector<int> assignment;    // pixel -> cluster, 0-based
    std::vector<long long> sizes;   // per cluster, sums to pixel count
    double sse = 0;                 // final energy
    int iterations = 0;             // assignment passes performed
    double epsilon = 0;
    bool standardized = false;
    std::vector<double> band_mean, band_sd; // set when standardized
    std::vector<double> sse_log;            // energy after each pass, non-increasing
};

// Lloyd iteration: assign to nearest center by squared Euclidean distance
// (ties to the lowest cluster id), recompute means, stop at a fixed point or
// when no center moved by epsilon. Empty clusters are reseeded with the pixel
// farthest from its own center so the model always has exactly k nonempty
// clusters.
ClusterModel kmeans(const Raster& raster, int k, const KmeansOptions& options = {});

// Recomputed energy of a model against a raster (uses the model's
// standardization parameters when present).
double sse(const Raster& raster, const ClusterModel& model);

// Pixel whose cell contains the world point. Points exactly on a cell
// boundary belong to the higher-index cell. Throws outside the extent.
int locate(const Raster& raster, double x, double y);

// Builds frame `frame_id` over `pop`: one psu per cluster sized by its pixel
// count. Every located unit gets a membership in the cluster of its pixel;
// unoccupied pixels are materialized as yield-less fill units so psu sizes
// stay equal to pixel counts. At most one located unit per pixel.
Frame& build_satellite_frame(Population& pop, const Raster& raster,
                             std::span<const int> labels, int k, int frame_id);
Frame& build_satellite_frame(Population& pop, const Raster& raster,
                             const ClusterModel& model, int frame_id);

} // namespace mfy
