// SPDX-License-Identifier: Apache-2.0
//
// Equal-height urban scenes: Manhattan-grid map generation, building rasters,
// endpoint sampling and the three-channel condition image.
//
// Coordinates are meters with the origin at the top-left corner of the scene;
// x grows with the column index and y with the row index.

#ifndef APSBENCH_SCENE_HPP
#define APSBENCH_SCENE_HPP

#include "apsbench/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace apsbench
{

struct Rect
{
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    // Open interior, so points on walls are outside.
    bool contains_interior(Point p) const { return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max; }
    friend bool operator==(const Rect &, const Rect &) = default;
};

struct UrbanMap
{
    int id = 0;
    double width_m = 0.0;
    double height_m = 0.0;
    double resolution_m = 1.0;
    std::vector<Rect> buildings;

    int width_px() const;
    int height_px() const;
    double free_fraction() const;
    bool inside_scene(Point p) const { return p.x >= 0.0 && p.x <= width_m && p.y >= 0.0 && p.y <= height_m; }
    bool inside_building(Point p) const;
    friend bool operator==(const UrbanMap &, const UrbanMap &) = default;
};

// Minimum share of non-building area every map must keep.
inline constexpr double k_min_free_fraction = 0.30;

struct MapParams
{
    double width_m = 512.0;
    double height_m = 512.0;
    double resolution_m = 2.0;
    double block_pitch_m = 80.0; // street-center to street-center
    double street_m = 32.0;
    double max_inset_m = 8.0;    // random setback per building side
    double drop_prob = 0.5;      // chance a block is left empty
    double split_prob = 0.4;     // chance a block holds two buildings
    double alley_m = 6.0;        // gap between the two halves of a split block
};

// Throws Error("scene", ...) on malformed parameters or when the result would
// violate the free-area invariant. Building edges are snapped to pixel borders.
UrbanMap generate_map(std::uint64_t seed, const MapParams &params, int id = 0);

struct Raster
{
    int H = 0;
    int W = 0;
    std::vector<std::uint8_t> cells; // row-major, 1 = building

    std::uint8_t at(int r, int c) const { return cells[static_cast<std::size_t>(r) * W + c]; }
    std::size_t count_occupied() const;
    friend bool operator==(const Raster &, const Raster &) = default;
};

// Pixel (r, c) is 1 iff its center lies in [x_min, x_max) x [y_min, y_max) of a building.
Raster rasterize(const UrbanMap &map, int H, int W);

// Pixel containing p, clamped to the grid.
std::pair<int, int> pixel_of(Point p, double resolution_m, int H, int W);

using Endpoint = Point;

struct EndpointSet
{
    std::vector<Endpoint> tx;
    std::vector<Endpoint> rx;
};

// Rejection sampling inside free raster cells. Throws Error("sampling", ...)
// when a point exhausts its retry budget.
EndpointSet sample_endpoints(const UrbanMap &map, int n_tx, int n_rx, std::uint64_t seed,
                             int max_tries_per_point = 10000);

struct HeatmapConfig
{
    double sigma_px = 2.0;
};

// Gaussian in pixel units, rescaled so the pixel containing p is exactly 1.
// Values that would underflow are floored at the smallest normal double.
std::vector<double> gaussian_heatmap(Endpoint p, const HeatmapConfig &cfg, int H, int W, double resolution_m);

struct ConditionImage
{
    int H = 0;
    int W = 0;
    std::vector<double> data; // 3 x H x W: building, Tx heatmap, Rx heatmap

    std::span<const double> channel(int k) const
    {
        const std::size_t n = static_cast<std::size_t>(H) * W;
        return {data.data() + k * n, n};
    }
};

ConditionImage build_condition(const Raster &raster, Endpoint tx, Endpoint rx, const HeatmapConfig &cfg,
                               double resolution_m);

// Persistence: map as JSON, raster as binary PGM (P5, maxval 255).
void save_map_json(const UrbanMap &map, const std::filesystem::path &path);
UrbanMap load_map_json(const std::filesystem::path &path);
void save_raster_pgm(const Raster &raster, const std::filesystem::path &path);
Raster load_raster_pgm(const std::filesystem::path &path);

} // namespace apsbench

#endif
