// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for tests. Nothing here calls the code
// path it is used to check.

#ifndef APSBENCH_TESTS_ORACLES_HPP
#define APSBENCH_TESTS_ORACLES_HPP

#include "apsbench/apslabel.hpp"
#include "apsbench/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle
{

using apsbench::ApsSpectrum;
using apsbench::PathRecord;
using apsbench::Point;
using apsbench::UrbanMap;

// Per-pixel containment against every rectangle.
inline std::vector<std::uint8_t> raster_cells(const UrbanMap &map, int H, int W)
{
    std::vector<std::uint8_t> out(static_cast<std::size_t>(H) * W, 0);
    const double sx = map.width_m / W, sy = map.height_m / H;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
        {
            const double x = (c + 0.5) * sx, y = (r + 0.5) * sy;
            for (const auto &b : map.buildings)
                if (x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max)
                    out[static_cast<std::size_t>(r) * W + c] = 1;
        }
    return out;
}

// Samples the open segment every `step` meters and tests strict containment.
inline bool segment_visible(const UrbanMap &map, Point a, Point b, double step = 0.1)
{
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int n = std::max(2, static_cast<int>(std::ceil(len / step)));
    for (int i = 1; i < n; ++i)
    {
        const double t = static_cast<double>(i) / n;
        const Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        for (const auto &r : map.buildings)
            if (p.x > r.x_min && p.x < r.x_max && p.y > r.y_min && p.y < r.y_max)
                return false;
    }
    return true;
}

inline double sinc2(double x)
{
    if (x == 0.0)
        return 1.0;
    const double v = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    return v * v;
}

// Array response as a direct phasor sum |sum_n exp(i n psi)|^2 / N^2.
inline double array_gain(double theta_deg, double theta_k_deg, int N, double d_lambda)
{
    const double deg = std::numbers::pi / 180.0;
    const double psi = std::numbers::pi * d_lambda * (std::sin(theta_deg * deg) - std::sin(theta_k_deg * deg));
    double re = 0.0, im = 0.0;
    for (int n = 0; n < N; ++n)
    {
        re += std::cos(2.0 * n * psi);
        im += std::sin(2.0 * n * psi);
    }
    return (re * re + im * im) / (static_cast<double>(N) * N);
}

// Term-by-term evaluation of the aggregation quantity.
inline double q_terms(const std::vector<PathRecord> &paths, double tau, double theta, double fs, int N, double d)
{
    double q = 0.0;
    for (const auto &p : paths)
    {
        const double s = sinc2(fs * (tau - p.tau_s));
        const double deg = std::numbers::pi / 180.0;
        const double psi = std::numbers::pi * d * (std::sin(theta * deg) - std::sin(p.aoa_deg * deg));
        const double af = std::abs(std::sin(psi)) < 1e-12 ? 1.0 : std::pow(std::sin(N * psi) / (N * std::sin(psi)), 2);
        q += p.power_lin * s * af;
    }
    return q;
}

// Max over {tau_k} and a uniform grid `refine` times finer than the label grid.
inline std::array<double, 180> dense_aps(const std::vector<PathRecord> &paths, const apsbench::KernelConfig &cfg,
                                         int refine = 50)
{
    double lo = paths.front().tau_s, hi = lo;
    for (const auto &p : paths)
    {
        lo = std::min(lo, p.tau_s);
        hi = std::max(hi, p.tau_s);
    }
    std::vector<double> taus;
    for (const auto &p : paths)
        taus.push_back(p.tau_s);
    const double step = 1.0 / (static_cast<double>(refine) * cfg.delay_oversample * cfg.fs_hz);
    const auto n = static_cast<long>(std::floor((hi - lo) / step));
    for (long i = 0; i <= n; ++i)
        taus.push_back(lo + static_cast<double>(i) * step);

    std::array<double, 180> out{};
    for (int j = 0; j < 180; ++j)
    {
        double best = 0.0;
        for (const double t : taus)
            best = std::max(best, q_terms(paths, t, -180.0 + 2.0 * j, cfg.fs_hz, cfg.n_elements, cfg.d_lambda));
        out[j] = best;
    }
    return out;
}

// Bin whose center is closest to theta in the array's own coordinate: sin(theta)
// taken modulo 1/d_lambda, the period of the array response. Ties go to the
// lowest bin.
inline int nearest_bin_in_sine(double theta_deg, double d_lambda)
{
    const double deg = std::numbers::pi / 180.0;
    const double period = 1.0 / d_lambda;
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < 180; ++j)
    {
        double d = std::fmod(std::abs(std::sin((-180.0 + 2.0 * j) * deg) - std::sin(theta_deg * deg)), period);
        d = std::min(d, period - d);
        if (d < best_d)
        {
            best_d = d;
            best = j;
        }
    }
    return best;
}

// Bin whose center is closest to theta on the circle.
inline int nearest_bin_in_angle(double theta_deg)
{
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < 180; ++j)
    {
        double d = std::fmod(std::abs(-180.0 + 2.0 * j - theta_deg), 360.0);
        d = std::min(d, 360.0 - d);
        if (d < best_d)
        {
            best_d = d;
            best = j;
        }
    }
    return best;
}

struct Moments
{
    double mean, stddev;
};

inline Moments two_pass(const std::vector<ApsSpectrum> &labels)
{
    long double sum = 0.0L;
    std::size_t n = 0;
    for (const auto &l : labels)
        for (const double v : l.bins)
        {
            sum += v;
            ++n;
        }
    const double mean = static_cast<double>(sum / n);
    long double ss = 0.0L;
    for (const auto &l : labels)
        for (const double v : l.bins)
            ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(static_cast<double>(ss / n))};
}

// ---- peaks -------------------------------------------------------------

struct BfPeak
{
    int bin;
    double height;
    bool dominant;
};

// Circular neighbour scan: a peak is the first bin of a run of equal values
// whose neighbours before and after the run are lower. Prominence walks the
// circle in both directions until a strictly higher bin.
inline std::vector<BfPeak> find_peaks(const ApsSpectrum &aps, bool dominance)
{
    constexpr int n = 180;
    const double mx = *std::max_element(aps.bins.begin(), aps.bins.end());
    if (mx == 0.0)
        return {{0, 1.0, true}};
    double h[n];
    for (int i = 0; i < n; ++i)
        h[i] = aps.bins[i] / mx;
    auto at = [&](int i) { return h[((i % n) + n) % n]; };

    std::vector<BfPeak> peaks;
    for (int i = 0; i < n; ++i)
    {
        if (!(at(i - 1) < h[i]))
            continue;
        int j = i + 1;
        int steps = 0;
        while (at(j) == h[i] && steps < n)
        {
            ++j;
            ++steps;
        }
        if (!(at(j) < h[i]))
            continue;
        double lmin = h[i], rmin = h[i];
        for (int k = 1; k < n && at(i - k) <= h[i]; ++k)
            lmin = std::min(lmin, at(i - k));
        for (int k = 1; k < n && at(i + k) <= h[i]; ++k)
            rmin = std::min(rmin, at(i + k));
        if (h[i] - std::max(lmin, rmin) >= 0.05)
            peaks.push_back({i, h[i], true});
    }
    if (peaks.empty())
    {
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (h[i] > h[arg])
                arg = i;
        return {{arg, 1.0, true}};
    }
    if (dominance)
    {
        double sum = 0.0;
        for (const auto &p : peaks)
            sum += p.height;
        int kept = 0;
        for (auto &p : peaks)
        {
            p.dominant = p.height / (sum + 1e-12) >= 0.1;
            kept += p.dominant;
        }
        if (kept == 0)
        {
            int best = 0;
            for (int i = 1; i < static_cast<int>(peaks.size()); ++i)
                if (peaks[i].height > peaks[best].height)
                    best = i;
            peaks[best].dominant = true;
        }
    }
    std::vector<BfPeak> out;
    for (const auto &p : peaks)
        if (p.dominant)
            out.push_back(p);
    return out;
}

// Distance between bin centers via integer bin arithmetic.
inline double bin_distance_deg(int a, int b)
{
    const int k = std::abs(a - b) % 180;
    return 2.0 * std::min(k, 180 - k);
}

inline const BfPeak &top(const std::vector<BfPeak> &peaks)
{
    const BfPeak *best = &peaks.front();
    for (const auto &p : peaks)
        if (p.height > best->height)
            best = &p;
    return *best;
}

struct PeakScores
{
    double ple;
    int hit2, hit4;
    double rec2, rec4;
};

inline PeakScores peak_scores(const ApsSpectrum &gt, const ApsSpectrum &pred)
{
    const auto g = find_peaks(gt, true);
    const auto p = find_peaks(pred, false);
    double sum = 0.0;
    int m2 = 0, m4 = 0;
    for (const auto &x : g)
    {
        double best = 1e9;
        for (const auto &y : p)
            best = std::min(best, bin_distance_deg(x.bin, y.bin));
        sum += best;
        m2 += best <= 2.0;
        m4 += best <= 4.0;
    }
    const double d_top = bin_distance_deg(top(g).bin, top(p).bin);
    const double n = static_cast<double>(g.size());
    return {sum / n, d_top <= 2.0, d_top <= 4.0, m2 / n, m4 / n};
}

} // namespace oracle

#endif
