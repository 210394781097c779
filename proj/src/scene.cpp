// SPDX-License-Identifier: Apache-2.0

#include "apsbench/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace apsbench
{

namespace
{

int extent_px(double extent_m, double resolution_m)
{
    return static_cast<int>(std::lround(extent_m / resolution_m));
}

bool whole_pixels(double extent_m, double resolution_m)
{
    const double px = extent_m / resolution_m;
    return std::abs(px - std::round(px)) <= 1e-9 * std::max(1.0, px);
}

void check_params(const MapParams &p)
{
    auto fail = [](const std::string &msg) { throw Error("scene", msg); };
    if (!(p.resolution_m > 0.0))
        fail("resolution_m must be positive");
    if (!(p.width_m > 0.0) || !(p.height_m > 0.0))
        fail("scene extent must be positive");
    if (!whole_pixels(p.width_m, p.resolution_m) || !whole_pixels(p.height_m, p.resolution_m))
        fail("scene extent must be a whole number of pixels");
    if (!(p.block_pitch_m > 0.0) || p.street_m < 0.0 || p.street_m >= p.block_pitch_m)
        fail("need 0 <= street_m < block_pitch_m");
    if (p.max_inset_m < 0.0 || p.alley_m < 0.0)
        fail("max_inset_m and alley_m must be non-negative");
    if (p.drop_prob < 0.0 || p.drop_prob > 1.0 || p.split_prob < 0.0 || p.split_prob > 1.0)
        fail("probabilities must lie in [0, 1]");
}

} // namespace

int UrbanMap::width_px() const { return extent_px(width_m, resolution_m); }
int UrbanMap::height_px() const { return extent_px(height_m, resolution_m); }

double UrbanMap::free_fraction() const
{
    double built = 0.0;
    for (const auto &b : buildings)
        built += b.area();
    return 1.0 - built / (width_m * height_m);
}

bool UrbanMap::inside_building(Point p) const
{
    return std::any_of(buildings.begin(), buildings.end(), [&](const Rect &b) { return b.contains_interior(p); });
}

UrbanMap generate_map(std::uint64_t seed, const MapParams &params, int id)
{
    check_params(params);
    Rng rng(seed);

    const double res = params.resolution_m;
    // Everything below is counted in whole pixels so building edges sit on pixel borders.
    const long pitch = std::lround(params.block_pitch_m / res);
    const long street = std::lround(params.street_m / res);
    const long inset_max = std::lround(params.max_inset_m / res);
    const long alley = std::max<long>(1, std::lround(params.alley_m / res));
    const long half_street = street / 2;
    const long nx = extent_px(params.width_m, res) / pitch;
    const long ny = extent_px(params.height_m, res) / pitch;

    UrbanMap map;
    map.id = id;
    map.width_m = params.width_m;
    map.height_m = params.height_m;
    map.resolution_m = res;

    auto to_rect = [res](long c0, long r0, long c1, long r1) {
        return Rect{static_cast<double>(c0) * res, static_cast<double>(r0) * res, static_cast<double>(c1) * res,
                    static_cast<double>(r1) * res};
    };

    for (long by = 0; by < ny; ++by)
    {
        for (long bx = 0; bx < nx; ++bx)
        {
            // Draw every variate even for dropped blocks so one block's outcome never
            // shifts the random stream of the next.
            const bool dropped = rng.uniform() < params.drop_prob;
            long inset[4];
            for (auto &v : inset)
                v = static_cast<long>(rng.below(static_cast<std::uint64_t>(inset_max + 1)));
            const bool split = rng.uniform() < params.split_prob;
            const bool split_vertical = rng.uniform() < 0.5;
            const double split_at = rng.uniform();
            if (dropped)
                continue;

            long c0 = bx * pitch + half_street + inset[0];
            long r0 = by * pitch + half_street + inset[1];
            long c1 = bx * pitch + pitch - (street - half_street) - inset[2];
            long r1 = by * pitch + pitch - (street - half_street) - inset[3];
            if (c1 <= c0 || r1 <= r0)
                continue;

            constexpr long min_side = 3;
            const long span = split_vertical ? c1 - c0 : r1 - r0;
            if (split && span >= 2 * min_side + alley)
            {
                const long cut = min_side + static_cast<long>(split_at * static_cast<double>(span - 2 * min_side - alley));
                if (split_vertical)
                {
                    map.buildings.push_back(to_rect(c0, r0, c0 + cut, r1));
                    map.buildings.push_back(to_rect(c0 + cut + alley, r0, c1, r1));
                }
                else
                {
                    map.buildings.push_back(to_rect(c0, r0, c1, r0 + cut));
                    map.buildings.push_back(to_rect(c0, r0 + cut + alley, c1, r1));
                }
            }
            else
            {
                map.buildings.push_back(to_rect(c0, r0, c1, r1));
            }
        }
    }

    const double free = map.free_fraction();
    if (free < k_min_free_fraction)
    {
        std::ostringstream msg;
        msg << "free-area fraction " << free << " violates the UrbanMap invariant (>= " << k_min_free_fraction << ")";
        throw Error("scene", msg.str());
    }
    return map;
}

std::size_t Raster::count_occupied() const
{
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

Raster rasterize(const UrbanMap &map, int H, int W)
{
    if (H < 1 || W < 1)
        throw Error("raster", "raster dimensions must be positive");
    const double res = map.resolution_m;
    if (std::abs(W * res - map.width_m) > 1e-9 * map.width_m || std::abs(H * res - map.height_m) > 1e-9 * map.height_m)
        throw Error("raster", "raster size inconsistent with map extent and resolution");

    Raster raster{H, W, std::vector<std::uint8_t>(static_cast<std::size_t>(H) * W, 0)};
    for (const auto &b : map.buildings)
    {
        const int c_lo = std::max(0, static_cast<int>(std::floor(b.x_min / res - 0.5)));
        const int c_hi = std::min(W - 1, static_cast<int>(std::ceil(b.x_max / res)));
        const int r_lo = std::max(0, static_cast<int>(std::floor(b.y_min / res - 0.5)));
        const int r_hi = std::min(H - 1, static_cast<int>(std::ceil(b.y_max / res)));
        for (int r = r_lo; r <= r_hi; ++r)
        {
            const double y = (r + 0.5) * res;
            if (y < b.y_min || y >= b.y_max)
                continue;
            for (int c = c_lo; c <= c_hi; ++c)
            {
                const double x = (c + 0.5) * res;
                if (x >= b.x_min && x < b.x_max)
                    raster.cells[static_cast<std::size_t>(r) * W + c] = 1;
            }
        }
    }
    return raster;
}

std::pair<int, int> pixel_of(Point p, double resolution_m, int H, int W)
{
    const int r = std::clamp(static_cast<int>(std::floor(p.y / resolution_m)), 0, H - 1);
    const int c = std::clamp(static_cast<int>(std::floor(p.x / resolution_m)), 0, W - 1);
    return {r, c};
}

EndpointSet sample_endpoints(const UrbanMap &map, int n_tx, int n_rx, std::uint64_t seed, int max_tries_per_point)
{
    if (n_tx < 0 || n_rx < 0)
        throw Error("sampling", "endpoint counts must be non-negative");
    const int H = map.height_px();
    const int W = map.width_px();
    const Raster raster = rasterize(map, H, W);
    if (raster.count_occupied() == raster.cells.size())
        throw Error("sampling", "map " + std::to_string(map.id) + " has no free cells");

    Rng rng(seed);
    auto draw = [&]() -> Endpoint {
        for (int attempt = 0; attempt < max_tries_per_point; ++attempt)
        {
            const Endpoint p{rng.uniform(0.0, map.width_m), rng.uniform(0.0, map.height_m)};
            const auto [r, c] = pixel_of(p, map.resolution_m, H, W);
            if (raster.at(r, c) == 0)
                return p;
        }
        throw Error("sampling", "retry budget exhausted on map " + std::to_string(map.id));
    };

    EndpointSet out;
    out.tx.reserve(n_tx);
    out.rx.reserve(n_rx);
    for (int i = 0; i < n_tx; ++i)
        out.tx.push_back(draw());
    for (int i = 0; i < n_rx; ++i)
        out.rx.push_back(draw());
    return out;
}

std::vector<double> gaussian_heatmap(Endpoint p, const HeatmapConfig &cfg, int H, int W, double resolution_m)
{
    if (!(cfg.sigma_px > 0.0))
        throw Error("condition", "sigma_px must be positive");
    const double px = p.x / resolution_m;
    const double py = p.y / resolution_m;
    const double inv_two_var = 1.0 / (2.0 * cfg.sigma_px * cfg.sigma_px);

    std::vector<double> out(static_cast<std::size_t>(H) * W);
    for (int r = 0; r < H; ++r)
    {
        const double dy = (r + 0.5) - py;
        for (int c = 0; c < W; ++c)
        {
            const double dx = (c + 0.5) - px;
            out[static_cast<std::size_t>(r) * W + c] = std::exp(-(dx * dx + dy * dy) * inv_two_var);
        }
    }

    // The containing pixel has the nearest center, hence the largest value.
    const auto [r0, c0] = pixel_of(p, resolution_m, H, W);
    const double peak = out[static_cast<std::size_t>(r0) * W + c0];
    for (auto &v : out)
        v = std::max(v / peak, std::numeric_limits<double>::min());
    return out;
}

ConditionImage build_condition(const Raster &raster, Endpoint tx, Endpoint rx, const HeatmapConfig &cfg,
                               double resolution_m)
{
    const int H = raster.H;
    const int W = raster.W;
    for (const auto &[name, p] : {std::pair{"tx", tx}, std::pair{"rx", rx}})
    {
        const auto [r, c] = pixel_of(p, resolution_m, H, W);
        if (raster.at(r, c) != 0)
            throw Error("condition", std::string(name) + " endpoint lies inside a building");
    }

    ConditionImage img;
    img.H = H;
    img.W = W;
    const std::size_t n = static_cast<std::size_t>(H) * W;
    img.data.resize(3 * n);
    std::copy(raster.cells.begin(), raster.cells.end(), img.data.begin());
    const auto tx_map = gaussian_heatmap(tx, cfg, H, W, resolution_m);
    const auto rx_map = gaussian_heatmap(rx, cfg, H, W, resolution_m);
    std::copy(tx_map.begin(), tx_map.end(), img.data.begin() + static_cast<std::ptrdiff_t>(n));
    std::copy(rx_map.begin(), rx_map.end(), img.data.begin() + static_cast<std::ptrdiff_t>(2 * n));
    return img;
}

void save_map_json(const UrbanMap &map, const std::filesystem::path &path)
{
    nlohmann::json j;
    j["id"] = map.id;
    j["width_m"] = map.width_m;
    j["height_m"] = map.height_m;
    j["resolution_m"] = map.resolution_m;
    j["buildings"] = nlohmann::json::array();
    for (const auto &b : map.buildings)
        j["buildings"].push_back({b.x_min, b.y_min, b.x_max, b.y_max});
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << j.dump(2) << '\n';
}

UrbanMap load_map_json(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("io", "cannot read map file " + path.string());
    try
    {
        const auto j = nlohmann::json::parse(is);
        UrbanMap map;
        map.id = j.at("id").get<int>();
        map.width_m = j.at("width_m").get<double>();
        map.height_m = j.at("height_m").get<double>();
        map.resolution_m = j.at("resolution_m").get<double>();
        for (const auto &b : j.at("buildings"))
            map.buildings.push_back(Rect{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                         b.at(3).get<double>()});
        return map;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error("io", "malformed map file " + path.string() + ": " + e.what());
    }
}

void save_raster_pgm(const Raster &raster, const std::filesystem::path &path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << "P5\n" << raster.W << ' ' << raster.H << "\n255\n";
    std::vector<char> bytes(raster.cells.size());
    std::transform(raster.cells.begin(), raster.cells.end(), bytes.begin(),
                   [](std::uint8_t v) { return static_cast<char>(v ? 255 : 0); });
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Raster load_raster_pgm(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("io", "cannot read raster file " + path.string());
    std::string magic;
    int W = 0, H = 0, maxval = 0;
    is >> magic >> W >> H >> maxval;
    is.get();
    if (magic != "P5" || W < 1 || H < 1 || maxval != 255)
        throw Error("io", "unsupported PGM header in " + path.string());
    std::vector<char> bytes(static_cast<std::size_t>(W) * H);
    is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (is.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw Error("io", "truncated PGM " + path.string());
    Raster raster{H, W, std::vector<std::uint8_t>(bytes.size())};
    std::transform(bytes.begin(), bytes.end(), raster.cells.begin(),
                   [](char v) { return static_cast<std::uint8_t>(v != 0 ? 1 : 0); });
    return raster;
}

} // namespace apsbench
