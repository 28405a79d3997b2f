#include "mfy/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfy/rng.hpp"
#include "mfy/summation.hpp"

namespace mfy {

namespace {

// Pixels are processed in fixed-size blocks. Parallel loops run over blocks
// and block partials are merged in block order, so results are bit-identical
// to the serial path at any thread count.
constexpr int kBlock = 2048;

struct BlockRange {
    int begin, end;
};

int block_count(int n) { return (n + kBlock - 1) / kBlock; }

BlockRange block_range(int b, int n) {
    return {b * kBlock, std::min(n, (b + 1) * kBlock)};
}

double dist2(const double* a, const double* b, int p) {
    double d = 0.0;
    for (int i = 0; i < p; ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

void check_raster(const Raster& r) {
    if (r.width < 1 || r.height < 1 || r.bands < 1) {
        throw std::invalid_argument("raster needs positive width, height and band count");
    }
    if (r.pixels.size() !=
        static_cast<std::size_t>(r.width) * r.height * r.bands) {
        throw std::invalid_argument("raster pixel buffer size does not match header");
    }
    if (!(r.psize_x > 0.0) || !(r.psize_y > 0.0)) {
        throw std::invalid_argument("raster pixel sizes must be positive");
    }
    for (double v : r.pixels) {
        if (!std::isfinite(v)) throw std::invalid_argument("raster has non-finite band values");
    }
}

// Nearest center per pixel; ties go to the lowest cluster id.
void assign_step(const std::vector<double>& data, int n, int p,
                 const std::vector<double>& centers, int k,
                 std::vector<int>& out, bool parallel) {
    const int nb = block_count(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int b = 0; b < nb; ++b) {
        const auto [begin, end] = block_range(b, n);
        for (int i = begin; i < end; ++i) {
            const double* x = data.data() + static_cast<std::size_t>(i) * p;
            int best = 0;
            double best_d = dist2(x, centers.data(), p);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(x, centers.data() + static_cast<std::size_t>(c) * p, p);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            out[i] = best;
        }
    }
    (void)parallel;
}

// Per-cluster means via blocked compensated partial sums merged in block
// order.
void update_centers(const std::vector<double>& data, int n, int p,
                    const std::vector<int>& assign, int k,
                    std::vector<double>& centers, std::vector<long long>& counts,
                    bool parallel) {
    const int nb = block_count(n);
    std::vector<double> partial(static_cast<std::size_t>(nb) * k * p, 0.0);
    std::vector<long long> pcount(static_cast<std::size_t>(nb) * k, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int b = 0; b < nb; ++b) {
        const auto [begin, end] = block_range(b, n);
        std::vector<NeumaierSum> acc(static_cast<std::size_t>(k) * p);
        for (int i = begin; i < end; ++i) {
            const int c = assign[i];
            ++pcount[static_cast<std::size_t>(b) * k + c];
            const double* x = data.data() + static_cast<std::size_t>(i) * p;
            NeumaierSum* row = acc.data() + static_cast<std::size_t>(c) * p;
            for (int j = 0; j < p; ++j) row[j].add(x[j]);
        }
        double* out = partial.data() + static_cast<std::size_t>(b) * k * p;
        for (std::size_t t = 0; t < acc.size(); ++t) out[t] = acc[t].value();
    }
    (void)parallel;

    counts.assign(static_cast<std::size_t>(k), 0);
    std::vector<NeumaierSum> total(static_cast<std::size_t>(k) * p);
    for (int b = 0; b < nb; ++b) {
        const double* src = partial.data() + static_cast<std::size_t>(b) * k * p;
        for (std::size_t t = 0; t < total.size(); ++t) total[t].add(src[t]);
        for (int c = 0; c < k; ++c) counts[c] += pcount[static_cast<std::size_t>(b) * k + c];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) continue; // repaired by the caller
        for (int j = 0; j < p; ++j) {
            centers[static_cast<std::size_t>(c) * p + j] =
                total[static_cast<std::size_t>(c) * p + j].value() /
                static_cast<double>(counts[c]);
        }
    }
}

double sse_blocked(const std::vector<double>& data, int n, int p,
                   const std::vector<int>& assign, const std::vector<double>& centers,
                   bool parallel) {
    const int nb = block_count(n);
    std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int b = 0; b < nb; ++b) {
        const auto [begin, end] = block_range(b, n);
        NeumaierSum acc;
        for (int i = begin; i < end; ++i) {
            acc.add(dist2(data.data() + static_cast<std::size_t>(i) * p,
                          centers.data() + static_cast<std::size_t>(assign[i]) * p, p));
        }
        partial[b] = acc.value();
    }
    (void)parallel;
    NeumaierSum total;
    for (double v : partial) total.add(v);
    return total.value();
}

// Moves the worst-fitting pixel of a multi-pixel cluster into each empty
// cluster; keeps k a hard contract.
bool repair_empty(const std::vector<double>& data, int n, int p,
                  const std::vector<double>& centers, int k,
                  std::vector<int>& assign) {
    std::vector<long long> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) ++counts[assign[i]];
    bool repaired = false;
    for (int c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        int far_pixel = -1;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
            if (counts[assign[i]] <= 1) continue;
            const double d = dist2(data.data() + static_cast<std::size_t>(i) * p,
                                   centers.data() + static_cast<std::size_t>(assign[i]) * p, p);
            if (d > far_d) {
                far_d = d;
                far_pixel = i;
            }
        }
        if (far_pixel < 0) {
            throw std::runtime_error("cannot repair empty cluster " + std::to_string(c + 1) +
                                     ": no donor cluster has more than one pixel");
        }
        --counts[assign[far_pixel]];
        assign[far_pixel] = c;
        ++counts[c];
        repaired = true;
    }
    return repaired;
}

long long count_distinct_vectors(const std::vector<double>& data, int n, int p) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int a, int b) {
        return std::lexicographical_compare(
            data.data() + static_cast<std::size_t>(a) * p,
            data.data() + static_cast<std::size_t>(a) * p + p,
            data.data() + static_cast<std::size_t>(b) * p,
            data.data() + static_cast<std::size_t>(b) * p + p);
    };
    std::sort(order.begin(), order.end(), less);
    long long distinct = n == 0 ? 0 : 1;
    for (int i = 1; i < n; ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

std::vector<double> init_centers(const std::vector<double>& data, int n, int p, int k,
                                 const KmeansOptions& opt) {
    std::vector<double> centers(static_cast<std::size_t>(k) * p);
    Rng rng(derive_seed(opt.seed, {0x6b6d65616e73ULL})); // "kmeans"

    auto vec_equal = [&](int i, const double* c) {
        return std::memcmp(data.data() + static_cast<std::size_t>(i) * p, c,
                           sizeof(double) * static_cast<std::size_t>(p)) == 0;
    };

    if (opt.greedy_spread_init) {
        int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        std::memcpy(centers.data(), data.data() + static_cast<std::size_t>(first) * p,
                    sizeof(double) * static_cast<std::size_t>(p));
        for (int c = 1; c < k; ++c) {
            int far_pixel = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                double d = std::numeric_limits<double>::infinity();
                for (int j = 0; j < c; ++j) {
                    d = std::min(d, dist2(data.data() + static_cast<std::size_t>(i) * p,
                                          centers.data() + static_cast<std::size_t>(j) * p, p));
                }
                if (d > far_d) {
                    far_d = d;
                    far_pixel = i;
                }
            }
            std::memcpy(centers.data() + static_cast<std::size_t>(c) * p,
                        data.data() + static_cast<std::size_t>(far_pixel) * p,
                        sizeof(double) * static_cast<std::size_t>(p));
        }
        return centers;
    }

    // Random distinct pixel vectors: walk a uniform permutation of pixel
    // indices, keeping the first k distinct vectors.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[i], perm[j]);
    }
    int have = 0;
    for (int idx : perm) {
        bool dup = false;
        for (int c = 0; c < have; ++c) {
            if (vec_equal(idx, centers.data() + static_cast<std::size_t>(c) * p)) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        std::memcpy(centers.data() + static_cast<std::size_t>(have) * p,
                    data.data() + static_cast<std::size_t>(idx) * p,
                    sizeof(double) * static_cast<std::size_t>(p));
        if (++have == k) break;
    }
    return centers;
}

} // namespace

ClusterModel kmeans(const Raster& raster, int k, const KmeansOptions& opt) {
    check_raster(raster);
    const int n = raster.pixel_count();
    const int p = raster.bands;
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (!(opt.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");

    ClusterModel model;
    model.k = k;
    model.bands = p;
    model.epsilon = opt.epsilon;
    model.standardized = opt.standardize;

    // Working copy of the pixel data (standardized when requested).
    std::vector<double> data = raster.pixels;
    if (opt.standardize) {
        model.band_mean.assign(static_cast<std::size_t>(p), 0.0);
        model.band_sd.assign(static_cast<std::size_t>(p), 1.0);
        for (int j = 0; j < p; ++j) {
            NeumaierSum s;
            for (int i = 0; i < n; ++i) s.add(data[static_cast<std::size_t>(i) * p + j]);
            const double mean = s.value() / n;
            NeumaierSum dev;
            for (int i = 0; i < n; ++i) {
                const double d = data[static_cast<std::size_t>(i) * p + j] - mean;
                dev.add(d * d);
            }
            const double sd = std::sqrt(dev.value() / n);
            model.band_mean[j] = mean;
            model.band_sd[j] = sd > 0.0 ? sd : 1.0;
            for (int i = 0; i < n; ++i) {
                auto& v = data[static_cast<std::size_t>(i) * p + j];
                v = (v - mean) / model.band_sd[j];
            }
        }
    }

    const long long distinct = count_distinct_vectors(data, n, p);
    if (k > distinct) {
        throw std::invalid_argument("k=" + std::to_string(k) + " exceeds the " +
                                    std::to_string(distinct) + " distinct pixel vectors");
    }

    std::vector<double> centers = init_centers(data, n, p, k, opt);
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<long long> counts;

    assign_step(data, n, p, centers, k, assign, opt.parallel);
    model.iterations = 1;

    for (;;) {
        repair_empty(data, n, p, centers, k, assign);

        const std::vector<double> prev = centers;
        update_centers(data, n, p, assign, k, centers, counts, opt.parallel);
        double disp = 0.0;
        for (int c = 0; c < k; ++c) {
            disp = std::max(disp, std::sqrt(dist2(prev.data() + static_cast<std::size_t>(c) * p,
                                                  centers.data() + static_cast<std::size_t>(c) * p,
                                                  p)));
        }

        model.sse_log.push_back(sse_blocked(data, n, p, assign, centers, opt.parallel));

        if (model.iterations >= opt.max_iter) break;

        std::vector<int> next(static_cast<std::size_t>(n));
        assign_step(data, n, p, centers, k, next, opt.parallel);
        ++model.iterations;
        if (next == assign) break; // fixed point

        assign = std::move(next);
        bool empty = false;
        {
            std::vector<long long> cnt(static_cast<std::size_t>(k), 0);
            for (int a : assign) ++cnt[a];
            for (long long c : cnt) {
                if (c == 0) empty = true;
            }
        }
        if (disp < opt.epsilon && !empty) {
            // Centers have settled; keep the refreshed assignment, which is by
            // construction a fixed point of the final centers.
            model.sse_log.push_back(sse_blocked(data, n, p, assign, centers, opt.parallel));
            break;
        }
    }

    model.centers = std::move(centers);
    model.assignment = std::move(assign);
    model.sizes.assign(static_cast<std::size_t>(k), 0);
    for (int a : model.assignment) ++model.sizes[a];
    model.sse = model.sse_log.back();
    return model;
}

double sse(const Raster& raster, const ClusterModel& model) {
    check_raster(raster);
    const int n = raster.pixel_count();
    const int p = raster.bands;
    if (model.bands != p || static_cast<int>(model.assignment.size()) != n) {
        throw std::invalid_argument("model dimensions do not match the raster");
    }
    std::vector<double> data = raster.pixels;
    if (model.standardized) {
        for (int j = 0; j < p; ++j) {
            for (int i = 0; i < n; ++i) {
                auto& v = data[static_cast<std::size_t>(i) * p + j];
                v = (v - model.band_mean[j]) / model.band_sd[j];
            }
        }
    }
    return sse_blocked(data, n, p, model.assignment, model.centers, false);
}

int locate(const Raster& raster, double x, double y) {
    const double fx = (x - raster.origin_x) / raster.psize_x;
    const double fy = (y - raster.origin_y) / raster.psize_y;
    const double cf = std::floor(fx);
    const double rf = std::floor(fy);
    if (cf < 0 || rf < 0 || cf >= raster.width || rf >= raster.height) {
        throw std::invalid_argument("point (" + std::to_string(x) + ", " + std::to_string(y) +
                                    ") lies outside the raster extent");
    }
    return static_cast<int>(rf) * raster.width + static_cast<int>(cf);
}

Frame& build_satellite_frame(Population& pop, const Raster& raster,
                             std::span<const int> labels, int k, int frame_id) {
    check_raster(raster);
    if (static_cast<int>(labels.size()) != raster.pixel_count()) {
        throw std::invalid_argument("label count does not match the raster");
    }
    if (pop.find_frame(frame_id)) {
        throw std::invalid_argument("population already has a frame " + std::to_string(frame_id));
    }
    for (int lab : labels) {
        if (lab < 0 || lab >= k) {
            throw std::invalid_argument("cluster label out of range for k=" + std::to_string(k));
        }
    }

    // One ssu per pixel: a located unit where present, a fill unit otherwise.
    std::vector<int> pixel_unit(labels.size(), -1);
    for (int ui = 0; ui < static_cast<int>(pop.units.size()); ++ui) {
        const UnitRecord& u = pop.units[ui];
        if (!u.location) continue;
        const int px = locate(raster, u.location->first, u.location->second);
        if (pixel_unit[px] >= 0) {
            throw std::invalid_argument("units '" + pop.units[pixel_unit[px]].id + "' and '" +
                                        u.id + "' occupy the same pixel " + std::to_string(px) +
                                        "; one ssu per pixel");
        }
        pixel_unit[px] = ui;
    }

    Frame frame;
    frame.id = frame_id;
    frame.psus.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) frame.psus[c].id = "c" + std::to_string(c + 1);

    for (int px = 0; px < static_cast<int>(labels.size()); ++px) {
        const int c = labels[px];
        int ui = pixel_unit[px];
        if (ui < 0) {
            UnitRecord fill;
            fill.id = "f" + std::to_string(frame_id) + "px" + std::to_string(px);
            if (pop.unit_index(fill.id) >= 0) {
                throw std::invalid_argument("fill unit id collision: '" + fill.id + "'");
            }
            ui = static_cast<int>(pop.units.size());
            pop.units.push_back(std::move(fill));
        }
        pop.units[ui].memberships[frame_id] = c;
        frame.psus[c].units.push_back(ui);
    }
    for (auto& psu : frame.psus) std::sort(psu.units.begin(), psu.units.end());

    pop.frames.push_back(std::move(frame));
    std::sort(pop.frames.begin(), pop.frames.end(),
              [](const Frame& a, const Frame& b) { return a.id < b.id; });
    pop.rebuild_index();
    return const_cast<Frame&>(pop.frame(frame_id));
}

Frame& build_satellite_frame(Population& pop, const Raster& raster,
                             const ClusterModel& model, int frame_id) {
    return build_satellite_frame(pop, raster, model.assignment, model.k, frame_id);
}

} // namespace mfy
