// SPDX-License-Identifier: Apache-2.0

#include "apsbench/raytrace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace apsbench
{

namespace
{

// Geometric slack in meters for side tests and wall-end rejection.
constexpr double k_eps = 1e-9;

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

} // namespace

bool los_visible(const UrbanMap &map, Point a, Point b)
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    for (const auto &r : map.buildings)
    {
        // Liang-Barsky clip of the segment against the closed rectangle.
        double t0 = 0.0, t1 = 1.0;
        const double p[4] = {-dx, dx, -dy, dy};
        const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
        bool outside = false;
        for (int k = 0; k < 4 && !outside; ++k)
        {
            if (p[k] == 0.0)
            {
                outside = q[k] < 0.0;
                continue;
            }
            const double t = q[k] / p[k];
            if (p[k] < 0.0)
                t0 = std::max(t0, t);
            else
                t1 = std::min(t1, t);
            outside = t0 >= t1;
        }
        if (outside)
            continue;
        // A chord of a rectangle is either on its boundary or has an interior midpoint.
        const double tm = 0.5 * (t0 + t1);
        const Point m{a.x + tm * dx, a.y + tm * dy};
        if (m.x > r.x_min + k_eps && m.x < r.x_max - k_eps && m.y > r.y_min + k_eps && m.y < r.y_max - k_eps)
            return false;
    }
    return true;
}

double wrap_angle_deg(double deg)
{
    double w = std::fmod(deg + 180.0, 360.0);
    if (w < 0.0)
        w += 360.0;
    w -= 180.0;
    return w >= 180.0 ? w - 360.0 : w;
}

double path_power(double length_m, int order, const TraceConfig &cfg)
{
    const double a = cfg.wavelength_m() / (4.0 * std::numbers::pi * length_m);
    return a * a * std::pow(10.0, -order * cfg.refl_loss_db / 10.0);
}

LinkTracer::LinkTracer(const UrbanMap &map, const TraceConfig &cfg) : map_(map), cfg_(cfg)
{
    if (!(cfg.fc_hz > 0.0) || !(cfg.c_mps > 0.0) || cfg.max_order < 0 || cfg.refl_loss_db < 0.0)
        throw Error("trace", "invalid trace configuration");
    walls_.reserve(map.buildings.size() * 4);
    for (const auto &b : map.buildings)
    {
        walls_.push_back({true, b.x_min, b.y_min, b.y_max, -1.0});
        walls_.push_back({true, b.x_max, b.y_min, b.y_max, +1.0});
        walls_.push_back({false, b.y_min, b.x_min, b.x_max, -1.0});
        walls_.push_back({false, b.y_max, b.x_min, b.x_max, +1.0});
    }
}

double LinkTracer::signed_offset(const Wall &w, Point p) const
{
    return w.outward * ((w.vertical ? p.x : p.y) - w.coord);
}

Point LinkTracer::mirror(const Wall &w, Point p) const
{
    return w.vertical ? Point{2.0 * w.coord - p.x, p.y} : Point{p.x, 2.0 * w.coord - p.y};
}

bool LinkTracer::solve_sequence(const std::vector<int> &seq, const std::vector<Point> &images, Point tx, Point rx,
                                TracedPath &path) const
{
    const std::size_t n = seq.size();
    std::vector<Point> hits(n);
    Point target = rx;
    for (std::size_t i = n; i-- > 0;)
    {
        const Wall &w = walls_[seq[i]];
        const Point img = images[i + 1];
        const double a = w.vertical ? target.x : target.y;
        const double b = w.vertical ? img.x : img.y;
        // The image and the target must sit strictly on opposite sides of the wall line.
        if ((a - w.coord) * (b - w.coord) >= 0.0)
            return false;
        const double t = (w.coord - a) / (b - a);
        if (!(t > 0.0 && t < 1.0))
            return false;
        const double along = w.vertical ? target.y + t * (img.y - target.y) : target.x + t * (img.x - target.x);
        // Hits at or next to a wall end are grazing and rejected.
        if (!(along > w.lo + k_eps && along < w.hi - k_eps))
            return false;
        hits[i] = w.vertical ? Point{w.coord, along} : Point{along, w.coord};
        target = hits[i];
    }

    path.chain.clear();
    path.chain.push_back(tx);
    path.chain.insert(path.chain.end(), hits.begin(), hits.end());
    path.chain.push_back(rx);

    // Specular reflection off the exterior face: both neighbours outside the wall.
    for (std::size_t i = 0; i < n; ++i)
    {
        const Wall &w = walls_[seq[i]];
        if (signed_offset(w, path.chain[i]) <= k_eps || signed_offset(w, path.chain[i + 2]) <= k_eps)
            return false;
    }
    for (std::size_t i = 0; i + 1 < path.chain.size(); ++i)
        if (!los_visible(map_, path.chain[i], path.chain[i + 1]))
            return false;

    path.order = static_cast<int>(n);
    path.length_m = distance(images[n], rx);
    const Point last = path.chain[n];
    path.record.tau_s = path.length_m / cfg_.c_mps;
    path.record.power_lin = path_power(path.length_m, path.order, cfg_);
    path.record.aoa_deg = wrap_angle_deg(std::atan2(last.y - rx.y, last.x - rx.x) * 180.0 / std::numbers::pi);
    return true;
}

void LinkTracer::search(std::vector<int> &seq, std::vector<Point> &images, Point tx, Point rx,
                        std::vector<TracedPath> &out) const
{
    const int depth = static_cast<int>(seq.size());
    if (depth > 0)
    {
        TracedPath path;
        if (solve_sequence(seq, images, tx, rx, path))
            out.push_back(std::move(path));
    }
    if (depth == cfg_.max_order)
        return;

    for (int w = 0; w < static_cast<int>(walls_.size()); ++w)
    {
        if (depth > 0 && seq.back() == w)
            continue;
        // The first bounce needs tx in front of the wall.
        if (depth == 0 && signed_offset(walls_[w], tx) <= k_eps)
            continue;
        seq.push_back(w);
        images.push_back(mirror(walls_[w], images.back()));
        search(seq, images, tx, rx, out);
        images.pop_back();
        seq.pop_back();
    }
}

std::vector<TracedPath> LinkTracer::trace(Point tx, Point rx) const
{
    for (const auto &[name, p] : {std::pair{"tx", tx}, std::pair{"rx", rx}})
    {
        if (!map_.inside_scene(p))
            throw Error("trace", std::string(name) + " endpoint outside the scene");
        if (map_.inside_building(p))
            throw Error("trace", std::string(name) + " endpoint inside a building");
    }
    if (tx == rx)
        throw Error("trace", "tx and rx coincide (zero-length link)");

    std::vector<TracedPath> out;
    if (los_visible(map_, tx, rx))
    {
        TracedPath los;
        los.order = 0;
        los.length_m = distance(tx, rx);
        los.chain = {tx, rx};
        los.record.tau_s = los.length_m / cfg_.c_mps;
        los.record.power_lin = path_power(los.length_m, 0, cfg_);
        los.record.aoa_deg = wrap_angle_deg(std::atan2(tx.y - rx.y, tx.x - rx.x) * 180.0 / std::numbers::pi);
        out.push_back(std::move(los));
    }

    std::vector<int> seq;
    std::vector<Point> images{tx};
    search(seq, images, tx, rx, out);

    std::stable_sort(out.begin(), out.end(), [](const TracedPath &a, const TracedPath &b) {
        if (a.record.tau_s != b.record.tau_s)
            return a.record.tau_s < b.record.tau_s;
        return a.record.aoa_deg < b.record.aoa_deg;
    });
    return out;
}

std::vector<PathRecord> trace_link(const UrbanMap &map, Point tx, Point rx, const TraceConfig &cfg)
{
    const auto traced = LinkTracer(map, cfg).trace(tx, rx);
    std::vector<PathRecord> out;
    out.reserve(traced.size());
    for (const auto &p : traced)
        out.push_back(p.record);
    return out;
}

void save_paths_csv(const std::vector<LinkPaths> &links, const std::filesystem::path &path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << "link_id,tau_s,aoa_deg,power_lin\n";
    for (const auto &link : links)
        for (const auto &p : link.paths)
            os << link.link_id << ',' << format_double(p.tau_s) << ',' << format_double(p.aoa_deg) << ','
               << format_double(p.power_lin) << '\n';
}

std::vector<LinkPaths> load_paths_csv(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("io", "cannot read path records " + path.string());
    std::string line;
    std::getline(is, line);
    if (line != "link_id,tau_s,aoa_deg,power_lin")
        throw Error("io", "unexpected path CSV header in " + path.string());

    std::vector<LinkPaths> out;
    std::size_t line_no = 1;
    while (std::getline(is, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        std::uint64_t id = 0;
        double vals[3];
        const char *cur = line.data();
        const char *end = line.data() + line.size();
        auto res = std::from_chars(cur, end, id);
        bool ok = res.ec == std::errc{} && res.ptr != end && *res.ptr == ',';
        cur = res.ptr + 1;
        for (int k = 0; k < 3 && ok; ++k)
        {
            auto r = std::from_chars(cur, end, vals[k]);
            ok = r.ec == std::errc{} && (k == 2 ? r.ptr == end : (r.ptr != end && *r.ptr == ','));
            cur = r.ptr + 1;
        }
        if (!ok)
            throw Error("io", path.string() + ":" + std::to_string(line_no) + ": malformed path record");
        if (out.empty() || out.back().link_id != id)
            out.push_back({id, {}});
        out.back().paths.push_back({vals[0], vals[1], vals[2]});
    }
    return out;
}

} // namespace apsbench
