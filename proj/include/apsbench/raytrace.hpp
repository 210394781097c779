// SPDX-License-Identifier: Apache-2.0
//
// 2D image-method multipath solver over the axis-aligned walls of an UrbanMap.
// Specular reflections up to a configurable order; no diffraction and no
// transmission through buildings.

#ifndef APSBENCH_RAYTRACE_HPP
#define APSBENCH_RAYTRACE_HPP

#include "apsbench/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace apsbench
{

struct PathRecord
{
    double tau_s = 0.0;     // propagation delay
    double aoa_deg = 0.0;   // arrival azimuth in [-180, 180), CCW from +x
    double power_lin = 0.0; // relative to unit transmit power
    friend bool operator==(const PathRecord &, const PathRecord &) = default;
};

struct TraceConfig
{
    double fc_hz = 3e9;
    double c_mps = 3e8;
    int max_order = 2;
    double refl_loss_db = 6.0;

    double wavelength_m() const { return c_mps / fc_hz; }
};

// A path plus the geometry it was derived from; `chain` runs tx, reflection
// points in order, rx.
struct TracedPath
{
    PathRecord record;
    int order = 0;
    double length_m = 0.0;
    std::vector<Point> chain;
};

// True iff the open segment (a, b) misses every building interior. Segments
// running along a wall or touching a corner count as visible.
bool los_visible(const UrbanMap &map, Point a, Point b);

// Normalizes an angle in degrees into [-180, 180).
double wrap_angle_deg(double deg);

// Free-space power with a fixed loss per bounce: (lambda / (4 pi d))^2 * 10^(-n L / 10).
double path_power(double length_m, int order, const TraceConfig &cfg);

class LinkTracer
{
public:
    LinkTracer(const UrbanMap &map, const TraceConfig &cfg);

    // Paths sorted by delay, ties by arrival angle. Throws Error("trace", ...)
    // for endpoints inside a building or outside the scene, and for tx == rx.
    std::vector<TracedPath> trace(Point tx, Point rx) const;

private:
    struct Wall
    {
        bool vertical;  // x = coord (vertical) or y = coord
        double coord;
        double lo, hi;  // extent along the wall
        double outward; // +1 or -1: sign of the exterior half-plane
    };

    double signed_offset(const Wall &w, Point p) const;
    Point mirror(const Wall &w, Point p) const;
    void search(std::vector<int> &seq, std::vector<Point> &images, Point tx, Point rx,
                std::vector<TracedPath> &out) const;
    bool solve_sequence(const std::vector<int> &seq, const std::vector<Point> &images, Point tx, Point rx,
                        TracedPath &path) const;

    const UrbanMap &map_;
    TraceConfig cfg_;
    std::vector<Wall> walls_;
};

std::vector<PathRecord> trace_link(const UrbanMap &map, Point tx, Point rx, const TraceConfig &cfg);

// Link identifier used across files: tx_index * n_rx + rx_index.
inline std::uint64_t link_id(int tx_index, int rx_index, int n_rx)
{
    return static_cast<std::uint64_t>(tx_index) * static_cast<std::uint64_t>(n_rx) + static_cast<std::uint64_t>(rx_index);
}

struct LinkPaths
{
    std::uint64_t link_id = 0;
    std::vector<PathRecord> paths;
};

// CSV with header `link_id,tau_s,aoa_deg,power_lin`, one row per path, floats
// in shortest round-trip form.
void save_paths_csv(const std::vector<LinkPaths> &links, const std::filesystem::path &path);
std::vector<LinkPaths> load_paths_csv(const std::filesystem::path &path);

} // namespace apsbench

#endif
