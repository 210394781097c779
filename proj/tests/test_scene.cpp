// SPDX-License-Identifier: Apache-2.0

#include "apsbench/scene.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace apsbench;

namespace
{

UrbanMap empty_map(double side = 512.0)
{
    UrbanMap m;
    m.width_m = m.height_m = side;
    m.resolution_m = 2.0;
    return m;
}

} // namespace

TEST_CASE("generate_map is deterministic per seed")
{
    const MapParams p;
    CHECK(generate_map(7, p) == generate_map(7, p));
    CHECK_FALSE(generate_map(7, p) == generate_map(8, p));
}

TEST_CASE("drop probability 1 leaves the scene empty")
{
    MapParams p;
    p.drop_prob = 1.0;
    const auto m = generate_map(7, p);
    CHECK(m.buildings.empty());
    CHECK(m.free_fraction() == 1.0);
}

TEST_CASE("free fraction agrees with a pixel count of the raster")
{
    const auto m = generate_map(7, MapParams{});
    const int H = m.height_px(), W = m.width_px();
    const auto cells = oracle::raster_cells(m, H, W);
    const auto occupied = std::accumulate(cells.begin(), cells.end(), std::size_t{0});
    const double counted = 1.0 - static_cast<double>(occupied) / (static_cast<double>(H) * W);
    CHECK(m.free_fraction() == doctest::Approx(counted).epsilon(1e-12));
    CHECK(rasterize(m, H, W).cells == cells);
}

TEST_CASE("generated maps respect their invariants across seeds")
{
    const MapParams p;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        const auto m = generate_map(seed, p, static_cast<int>(seed));
        CHECK(m.id == static_cast<int>(seed));
        CHECK(m.free_fraction() >= k_min_free_fraction);
        for (const auto &b : m.buildings)
        {
            CHECK(b.area() > 0.0);
            CHECK(b.x_min >= 0.0);
            CHECK(b.y_min >= 0.0);
            CHECK(b.x_max <= m.width_m);
            CHECK(b.y_max <= m.height_m);
            // pixel-aligned edges
            CHECK(std::fmod(b.x_min, m.resolution_m) == 0.0);
            CHECK(std::fmod(b.y_max, m.resolution_m) == 0.0);
        }
    }
}

TEST_CASE("dense parameters violate the free-area invariant")
{
    MapParams p;
    p.street_m = 0.0;
    p.max_inset_m = 0.0;
    p.drop_prob = 0.0;
    p.split_prob = 0.0;
    try
    {
        generate_map(1, p);
        FAIL("expected a scene error");
    }
    catch (const Error &e)
    {
        CHECK(e.stage() == "scene");
        CHECK(std::string(e.what()).find("free-area") != std::string::npos);
    }
}

TEST_CASE("malformed map parameters are rejected")
{
    MapParams p;
    p.resolution_m = 0.0;
    CHECK_THROWS_AS(generate_map(1, p), Error);
    p = MapParams{};
    p.street_m = p.block_pitch_m;
    CHECK_THROWS_AS(generate_map(1, p), Error);
    p = MapParams{};
    p.drop_prob = 1.5;
    CHECK_THROWS_AS(generate_map(1, p), Error);
}

TEST_CASE("rasterize examples")
{
    auto m = empty_map();
    CHECK(rasterize(m, 256, 256).count_occupied() == 0);

    m.buildings = {{0, 0, 512, 512}};
    CHECK(rasterize(m, 256, 256).count_occupied() == 256u * 256u);

    m.buildings = {{0, 0, 256, 256}};
    const auto r = rasterize(m, 256, 256);
    CHECK(r.cells == oracle::raster_cells(m, 256, 256));
    for (int i = 0; i < 256; ++i)
        for (int j = 0; j < 256; ++j)
            REQUIRE(r.at(i, j) == (i < 128 && j < 128 ? 1 : 0));

    CHECK_THROWS_AS(rasterize(m, 100, 256), Error);
}

TEST_CASE("pixel-aligned rectangles rasterize to their exact area")
{
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto m = empty_map();
        const auto x0 = static_cast<double>(rng.below(250)), y0 = static_cast<double>(rng.below(250));
        const auto w = 1.0 + static_cast<double>(rng.below(256 - static_cast<std::uint64_t>(x0) - 1));
        const auto h = 1.0 + static_cast<double>(rng.below(256 - static_cast<std::uint64_t>(y0) - 1));
        m.buildings = {{2 * x0, 2 * y0, 2 * (x0 + w), 2 * (y0 + h)}};
        const auto r = rasterize(m, 256, 256);
        CHECK(static_cast<double>(r.count_occupied()) * 4.0 == m.buildings[0].area());
    }
}

TEST_CASE("endpoint sampling")
{
    SUBCASE("empty map always succeeds")
    {
        const auto m = empty_map();
        const auto e = sample_endpoints(m, 1, 1, 3);
        REQUIRE(e.tx.size() == 1);
        CHECK(m.inside_scene(e.tx[0]));
    }
    SUBCASE("deterministic")
    {
        const auto m = generate_map(7, MapParams{});
        const auto a = sample_endpoints(m, 10, 50, 11);
        const auto b = sample_endpoints(m, 10, 50, 11);
        CHECK(a.tx == b.tx);
        CHECK(a.rx == b.rx);
    }
    SUBCASE("all points are outdoors by raster lookup")
    {
        const auto m = generate_map(7, MapParams{});
        const int H = m.height_px(), W = m.width_px();
        const auto cells = oracle::raster_cells(m, H, W);
        const auto e = sample_endpoints(m, 10, 50, 11);
        CHECK(e.tx.size() == 10);
        CHECK(e.rx.size() == 50);
        auto pts = e.tx;
        pts.insert(pts.end(), e.rx.begin(), e.rx.end());
        for (const auto &p : pts)
        {
            const int c = static_cast<int>(std::floor(p.x / m.resolution_m));
            const int r = static_cast<int>(std::floor(p.y / m.resolution_m));
            REQUIRE(r >= 0);
            REQUIRE(c >= 0);
            REQUIRE(r < H);
            REQUIRE(c < W);
            CHECK(cells[static_cast<std::size_t>(r) * W + c] == 0);
            CHECK_FALSE(m.inside_building(p));
        }
    }
    SUBCASE("fully built map fails")
    {
        auto m = empty_map(64);
        m.buildings = {{0, 0, 64, 64}};
        CHECK_THROWS_AS(sample_endpoints(m, 1, 0, 1), Error);
    }
    SUBCASE("tiny free area exhausts the retry budget")
    {
        auto m = empty_map(512);
        m.buildings = {{2, 0, 512, 512}, {0, 2, 2, 512}};
        try
        {
            sample_endpoints(m, 1, 0, 5, 3);
            FAIL("expected a sampling error");
        }
        catch (const Error &e)
        {
            CHECK(e.stage() == "sampling");
        }
    }
}

TEST_CASE("gaussian heatmap")
{
    const int H = 64, W = 64;
    const double res = 2.0;
    HeatmapConfig cfg;

    SUBCASE("unit value at the containing pixel")
    {
        const Point p{33.3, 71.9};
        const auto g = gaussian_heatmap(p, cfg, H, W, res);
        const auto [r, c] = pixel_of(p, res, H, W);
        CHECK(r == 35);
        CHECK(c == 16);
        CHECK(g[static_cast<std::size_t>(r) * W + c] == 1.0);
        CHECK(*std::max_element(g.begin(), g.end()) == 1.0);
        CHECK(*std::min_element(g.begin(), g.end()) > 0.0);
    }
    SUBCASE("one sigma away")
    {
        const Point p{(10 + 0.5) * res, (20 + 0.5) * res}; // pixel center of (20, 10)
        const auto g = gaussian_heatmap(p, cfg, H, W, res);
        CHECK(g[20 * W + 12] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
        CHECK(g[22 * W + 10] == doctest::Approx(0.606531).epsilon(1e-6));
    }
    SUBCASE("channel sum matches direct summation")
    {
        const Point p{W * res / 2.0, H * res / 2.0};
        const auto g = gaussian_heatmap(p, cfg, H, W, res);
        const auto [r0, c0] = pixel_of(p, res, H, W);
        auto raw = [&](int r, int c) {
            const double dx = (c + 0.5) - p.x / res, dy = (r + 0.5) - p.y / res;
            return std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.sigma_px * cfg.sigma_px));
        };
        double expect = 0.0;
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c)
                expect += raw(r, c);
        expect /= raw(r0, c0);
        const double got = std::accumulate(g.begin(), g.end(), 0.0);
        CHECK(std::abs(got - expect) <= 1e-9 * expect);
    }
    SUBCASE("far tails stay strictly positive")
    {
        cfg.sigma_px = 0.5;
        const auto g = gaussian_heatmap({1.0, 1.0}, cfg, 256, 256, res);
        CHECK(*std::min_element(g.begin(), g.end()) > 0.0);
    }
}

TEST_CASE("condition image")
{
    auto m = empty_map(128);
    const auto raster = rasterize(m, 64, 64);
    const HeatmapConfig cfg;

    SUBCASE("empty map")
    {
        const auto img = build_condition(raster, {10, 10}, {100, 50}, cfg, 2.0);
        CHECK(img.data.size() == 3u * 64 * 64);
        const auto b = img.channel(0);
        CHECK(std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; }));
        for (int k = 1; k <= 2; ++k)
        {
            const auto ch = img.channel(k);
            CHECK(*std::max_element(ch.begin(), ch.end()) == 1.0);
        }
    }
    SUBCASE("tx equal to rx gives identical heatmaps")
    {
        const auto img = build_condition(raster, {31, 17}, {31, 17}, cfg, 2.0);
        const auto a = img.channel(1), b = img.channel(2);
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
    SUBCASE("endpoint in a building")
    {
        m.buildings = {{0, 0, 20, 20}};
        const auto r = rasterize(m, 64, 64);
        CHECK_THROWS_AS(build_condition(r, {5, 5}, {100, 50}, cfg, 2.0), Error);
        CHECK_THROWS_AS(build_condition(r, {100, 50}, {5, 5}, cfg, 2.0), Error);
        const auto img = build_condition(r, {30, 30}, {100, 50}, cfg, 2.0);
        CHECK(img.channel(0)[0] == 1.0);
    }
}

TEST_CASE("map and raster files round-trip")
{
    testutil::TempDir dir("scene");
    const auto m = generate_map(21, MapParams{}, 4);
    save_map_json(m, dir / "m.json");
    CHECK(load_map_json(dir / "m.json") == m);

    const auto r = rasterize(m, m.height_px(), m.width_px());
    save_raster_pgm(r, dir / "r.pgm");
    CHECK(load_raster_pgm(dir / "r.pgm") == r);

    CHECK_THROWS_AS(load_map_json(dir / "missing.json"), Error);
    CHECK_THROWS_AS(load_raster_pgm(dir / "m.json"), Error);
}
