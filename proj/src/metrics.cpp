// SPDX-License-Identifier: Apache-2.0

#include "apsbench/metrics.hpp"

#include "apsbench/apsl_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

namespace apsbench
{

double circular_distance(double a_deg, double b_deg)
{
    const double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
    return std::min(d, 360.0 - d);
}

std::vector<Peak> PeakSet::retained() const
{
    std::vector<Peak> out;
    std::copy_if(peaks.begin(), peaks.end(), std::back_inserter(out), [](const Peak &p) { return p.dominant; });
    return out;
}

const Peak &strongest(const std::vector<Peak> &peaks)
{
    if (peaks.empty())
        throw Error("metrics", "strongest() of an empty peak list");
    const Peak *best = &peaks.front();
    for (const auto &p : peaks)
        if (p.height > best->height || (p.height == best->height && p.bin < best->bin))
            best = &p;
    return *best;
}

PeakSet detect_peaks(const ApsSpectrum &aps, bool dominance_filter)
{
    constexpr int n = k_aps_bins;
    const double peak_value = aps.max();
    // An all-zero prediction is flat, so it takes the all-equal fallback.
    if (peak_value == 0.0 && *std::min_element(aps.bins.begin(), aps.bins.end()) == 0.0)
        return PeakSet{{{0, bin_center_deg(0), 1.0, 0.0, true}}};
    if (!(peak_value > 0.0))
        throw Error("metrics", "detect_peaks: spectrum has no positive maximum");

    std::array<double, n> h{};
    for (int j = 0; j < n; ++j)
        h[j] = aps.bins[j] / peak_value;

    // Rotate so the global minimum opens the signal, and repeat it at the end so
    // every circular maximum becomes an interior maximum of a linear signal.
    const int shift = static_cast<int>(std::min_element(h.begin(), h.end()) - h.begin());
    std::array<double, n + 1> y{};
    for (int i = 0; i < n; ++i)
        y[i] = h[(i + shift) % n];
    y[n] = y[0];

    PeakSet set;
    int i = 1;
    while (i < n)
    {
        if (!(y[i - 1] < y[i]))
        {
            ++i;
            continue;
        }
        int end = i;
        while (end + 1 <= n && y[end + 1] == y[i])
            ++end;
        if (end + 1 <= n && y[end + 1] < y[i])
        {
            double left_min = y[i];
            for (int k = i - 1; k >= 0 && y[k] <= y[i]; --k)
                left_min = std::min(left_min, y[k]);
            double right_min = y[i];
            for (int k = i + 1; k <= n && y[k] <= y[i]; ++k)
                right_min = std::min(right_min, y[k]);
            const double prominence = y[i] - std::max(left_min, right_min);
            if (prominence >= k_prominence_threshold)
            {
                const int bin = (i + shift) % n;
                set.peaks.push_back({bin, bin_center_deg(bin), y[i], prominence, true});
            }
        }
        i = end + 1;
    }

    if (set.peaks.empty())
    {
        const int bin = static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
        set.peaks.push_back({bin, bin_center_deg(bin), 1.0, 1.0 - h[shift], true});
        return set;
    }
    std::sort(set.peaks.begin(), set.peaks.end(), [](const Peak &a, const Peak &b) { return a.bin < b.bin; });

    if (dominance_filter)
    {
        double total = 0.0;
        for (const auto &p : set.peaks)
            total += p.height;
        bool any = false;
        for (auto &p : set.peaks)
        {
            p.dominant = p.height / (total + k_dominance_eps) >= k_dominance_ratio;
            any = any || p.dominant;
        }
        if (!any)
        {
            const int best = strongest(set.peaks).bin;
            for (auto &p : set.peaks)
                p.dominant = p.bin == best;
        }
    }
    return set;
}

namespace
{

double nearest_distance(double angle, const std::vector<Peak> &candidates)
{
    double best = 180.0;
    for (const auto &c : candidates)
        best = std::min(best, circular_distance(angle, c.angle_deg));
    return best;
}

PeakMetrics peak_metrics_from_sets(const std::vector<Peak> &gt, const std::vector<Peak> &pred)
{
    PeakMetrics m;
    double sum = 0.0;
    std::vector<double> nearest;
    nearest.reserve(gt.size());
    for (const auto &p : gt)
    {
        nearest.push_back(nearest_distance(p.angle_deg, pred));
        sum += nearest.back();
    }
    m.ple_deg = sum / static_cast<double>(gt.size());
    const double top = circular_distance(strongest(gt).angle_deg, strongest(pred).angle_deg);
    for (const double delta : k_deltas_deg)
    {
        m.hit[delta] = top <= delta ? 1 : 0;
        const auto matched = std::count_if(nearest.begin(), nearest.end(), [delta](double d) { return d <= delta; });
        m.recall[delta] = static_cast<double>(matched) / static_cast<double>(gt.size());
    }
    return m;
}

} // namespace

PeakMetrics peak_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred)
{
    return peak_metrics_from_sets(detect_peaks(gt, true).retained(), detect_peaks(pred, false).retained());
}

double ple(const ApsSpectrum &gt, const ApsSpectrum &pred) { return peak_metrics(gt, pred).ple_deg; }

int hit_at(const ApsSpectrum &gt, const ApsSpectrum &pred, double delta_deg)
{
    const auto g = detect_peaks(gt, true).retained();
    const auto p = detect_peaks(pred, false).retained();
    return circular_distance(strongest(g).angle_deg, strongest(p).angle_deg) <= delta_deg ? 1 : 0;
}

double recall_at(const ApsSpectrum &gt, const ApsSpectrum &pred, double delta_deg)
{
    const auto g = detect_peaks(gt, true).retained();
    const auto p = detect_peaks(pred, false).retained();
    const auto matched =
        std::count_if(g.begin(), g.end(), [&](const Peak &x) { return nearest_distance(x.angle_deg, p) <= delta_deg; });
    return static_cast<double>(matched) / static_cast<double>(g.size());
}

ReconstructionMetrics reconstruction_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred)
{
    double abs_sum = 0.0, err2 = 0.0, gt2 = 0.0, pred2 = 0.0, dot = 0.0;
    for (int j = 0; j < k_aps_bins; ++j)
    {
        const double e = pred.bins[j] - gt.bins[j];
        abs_sum += std::abs(e);
        err2 += e * e;
        gt2 += gt.bins[j] * gt.bins[j];
        pred2 += pred.bins[j] * pred.bins[j];
        dot += gt.bins[j] * pred.bins[j];
    }
    ReconstructionMetrics m;
    m.mae = abs_sum / k_aps_bins;
    const double mse = err2 / k_aps_bins;
    m.psnr_db = mse < 1e-30 ? k_psnr_cap_db : std::min(k_psnr_cap_db, 10.0 * std::log10(1.0 / mse));
    m.nmse_db = (err2 == 0.0 || gt2 == 0.0) ? k_nmse_floor_db
                                            : std::max(k_nmse_floor_db, 10.0 * std::log10(err2 / gt2));
    if (gt2 == 0.0 || pred2 == 0.0)
    {
        m.shape_valid = false;
        return m;
    }
    m.cossim = std::clamp(dot / std::sqrt(gt2 * pred2), -1.0, 1.0);
    m.spectral_angle_deg = std::acos(m.cossim) * 180.0 / std::numbers::pi;
    return m;
}

SampleMetrics sample_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred)
{
    return {reconstruction_metrics(gt, pred), peak_metrics(gt, pred)};
}

MetricReport evaluate_samples(std::span<const ApsSpectrum> gt, std::span<const ApsSpectrum> pred, int jobs)
{
    if (gt.size() != pred.size())
        throw Error("evaluate", "row-count mismatch: " + std::to_string(pred.size()) + " predictions for " +
                                    std::to_string(gt.size()) + " labels");
    if (gt.empty())
        throw Error("evaluate", "no samples to evaluate");

    std::vector<SampleMetrics> per(gt.size());
    parallel_for(gt.size(), jobs, [&](std::size_t i) { per[i] = sample_metrics(gt[i], pred[i]); });

    MetricReport r;
    r.n_samples = gt.size();
    std::uint64_t shape_n = 0;
    double mae = 0, psnr = 0, nmse = 0, cos = 0, angle = 0, ple_sum = 0;
    std::map<double, double> hit, rec;
    for (const auto &s : per)
    {
        mae += s.rec.mae;
        psnr += s.rec.psnr_db;
        nmse += s.rec.nmse_db;
        if (s.rec.shape_valid)
        {
            ++shape_n;
            cos += s.rec.cossim;
            angle += s.rec.spectral_angle_deg;
        }
        ple_sum += s.peaks.ple_deg;
        r.ple_values.push_back(s.peaks.ple_deg);
        for (const double d : k_deltas_deg)
        {
            hit[d] += s.peaks.hit.at(d);
            rec[d] += s.peaks.recall.at(d);
        }
    }
    const auto n = static_cast<double>(gt.size());
    r.mae = mae / n;
    r.psnr_db = psnr / n;
    r.nmse_db = nmse / n;
    r.cossim = shape_n ? cos / static_cast<double>(shape_n) : 0.0;
    r.spectral_angle_deg = shape_n ? angle / static_cast<double>(shape_n) : 0.0;
    r.ple_deg = ple_sum / n;
    for (const double d : k_deltas_deg)
    {
        r.hit_at[d] = hit[d] / n;
        r.recall_at[d] = rec[d] / n;
    }
    for (const char *k : {"mae", "psnr_db", "nmse_db", "ple_deg", "hit_at", "recall_at"})
        r.counts[k] = gt.size();
    r.counts["cossim"] = shape_n;
    r.counts["spectral_angle_deg"] = shape_n;
    return r;
}

ApsSpectrum reconcile_prediction(const ApsSpectrum &pred, const std::optional<NormStats> &stats)
{
    switch (pred.domain)
    {
    case Domain::normalized_linear:
        return pred;
    case Domain::standardized:
        if (!stats)
            throw Error("evaluate", "standardized predictions need dataset statistics; run `stats` first");
        return destandardize(pred, *stats);
    case Domain::raw_linear:
        return normalize_db(pred);
    }
    throw Error("evaluate", "unknown prediction domain");
}

MetricReport evaluate_run(const Manifest &manifest, const std::filesystem::path &pred_file, SplitSide side, int jobs)
{
    const auto gt = load_side_labels(manifest, side);
    auto pred = read_apsl(pred_file);
    if (pred.size() != gt.size())
        throw Error("evaluate", "row-count mismatch: " + pred_file.string() + " has " + std::to_string(pred.size()) +
                                    " rows, " + to_string(side) + " split has " + std::to_string(gt.size()) +
                                    " valid samples");
    std::optional<NormStats> stats;
    if (manifest.stats)
        stats = manifest.stats->stats;
    for (auto &p : pred)
        p = reconcile_prediction(p, stats);
    return evaluate_samples(gt, pred, jobs);
}

nlohmann::json report_to_json(const MetricReport &r)
{
    auto delta_map = [](const std::map<double, double> &m) {
        nlohmann::json j;
        for (const auto &[d, v] : m)
            j[format_double(d)] = v;
        return j;
    };
    nlohmann::json j;
    j["mae"] = r.mae;
    j["psnr_db"] = r.psnr_db;
    j["nmse_db"] = r.nmse_db;
    j["cossim"] = r.cossim;
    j["spectral_angle_deg"] = r.spectral_angle_deg;
    j["ple_deg"] = r.ple_deg;
    j["hit_at"] = delta_map(r.hit_at);
    j["recall_at"] = delta_map(r.recall_at);
    j["latency_ms_per_sample"] = r.latency_ms_per_sample ? nlohmann::json(*r.latency_ms_per_sample) : nlohmann::json();
    j["n_samples"] = r.n_samples;
    j["counts"] = r.counts;
    return j;
}

std::vector<std::pair<double, double>> ple_ccdf(std::span<const double> ple_values, std::span<const double> thresholds)
{
    for (const double v : ple_values)
        if (v < 0.0 || std::isnan(v))
            throw Error("ccdf", "PLE values must be non-negative");
    std::vector<std::pair<double, double>> out;
    out.reserve(thresholds.size());
    for (const double t : thresholds)
    {
        const auto above = std::count_if(ple_values.begin(), ple_values.end(), [t](double v) { return v > t; });
        out.emplace_back(t, ple_values.empty() ? 0.0
                                               : static_cast<double>(above) / static_cast<double>(ple_values.size()));
    }
    return out;
}

std::vector<double> default_ccdf_thresholds()
{
    std::vector<double> t;
    for (int i = 0; i <= 180; ++i)
        t.push_back(static_cast<double>(i));
    return t;
}

void write_ccdf_csv(const std::vector<std::pair<double, double>> &ccdf, const std::filesystem::path &path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << "threshold_deg,ccdf\n";
    for (const auto &[t, f] : ccdf)
        os << format_double(t) << ',' << format_double(f) << '\n';
}

double measure_latency(const Predictor &predictor, std::span<const ConditionImage> samples)
{
    if (samples.size() < 100)
        throw Error("bench", "latency needs at least 100 samples, got " + std::to_string(samples.size()));
    volatile double sink = 0.0;
    for (const auto &s : samples)
        sink = sink + predictor(s).bins[0];

    const auto start = std::chrono::steady_clock::now();
    for (const auto &s : samples)
        sink = sink + predictor(s).bins[0];
    const auto stop = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return ms / static_cast<double>(samples.size());
}

} // namespace apsbench
