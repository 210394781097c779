// SPDX-License-Identifier: Apache-2.0
//
// Evaluation protocol for APS predictions: point-wise reconstruction,
// spectral shape, peak localization (PLE), dominant-direction hit/recall,
// the PLE CCDF and per-sample latency.

#ifndef APSBENCH_METRICS_HPP
#define APSBENCH_METRICS_HPP

#include "apsbench/apslabel.hpp"
#include "apsbench/datasetio.hpp"
#include "apsbench/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apsbench
{

inline constexpr double k_prominence_threshold = 0.05;
inline constexpr double k_dominance_ratio = 0.1;
inline constexpr double k_dominance_eps = 1e-12;
inline constexpr double k_psnr_cap_db = 300.0;
inline constexpr double k_nmse_floor_db = -300.0;
inline constexpr double k_deltas_deg[] = {2.0, 4.0};

// Smallest angle between two directions, in [0, 180].
double circular_distance(double a_deg, double b_deg);

struct Peak
{
    int bin = 0;
    double angle_deg = 0.0;
    double height = 0.0; // after max-normalization
    double prominence = 0.0;
    bool dominant = true;
};

struct PeakSet
{
    std::vector<Peak> peaks; // ascending bin

    // Peaks whose dominant flag is set; never empty for a detect_peaks result.
    std::vector<Peak> retained() const;
};

// Highest peak; ties go to the lowest bin.
const Peak &strongest(const std::vector<Peak> &peaks);

// Local maxima of the circular spectrum with topographic prominence >= 0.05
// after max-normalization. With dominance_filter, peaks whose share
// h_i / (sum h + 1e-12) is below 0.1 lose their dominant flag; if none keeps
// it, the highest peak does. When nothing passes the prominence test the
// global argmax is returned alone; an all-zero spectrum counts as flat.
PeakSet detect_peaks(const ApsSpectrum &aps, bool dominance_filter);

double ple(const ApsSpectrum &gt, const ApsSpectrum &pred);
int hit_at(const ApsSpectrum &gt, const ApsSpectrum &pred, double delta_deg);
double recall_at(const ApsSpectrum &gt, const ApsSpectrum &pred, double delta_deg);

struct PeakMetrics
{
    double ple_deg = 0.0;
    std::map<double, int> hit;      // delta -> 0/1
    std::map<double, double> recall; // delta -> fraction
};

// All peak metrics from one detection pass per spectrum.
PeakMetrics peak_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred);

struct ReconstructionMetrics
{
    double mae = 0.0;
    double psnr_db = 0.0;
    double nmse_db = 0.0;
    double cossim = 0.0;
    double spectral_angle_deg = 0.0;
    bool shape_valid = true; // false when either spectrum has zero norm
};

ReconstructionMetrics reconstruction_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred);

struct SampleMetrics
{
    ReconstructionMetrics rec;
    PeakMetrics peaks;
};

SampleMetrics sample_metrics(const ApsSpectrum &gt, const ApsSpectrum &pred);

struct MetricReport
{
    double mae = 0.0;
    double psnr_db = 0.0;
    double nmse_db = 0.0;
    double cossim = 0.0;
    double spectral_angle_deg = 0.0;
    double ple_deg = 0.0;
    std::map<double, double> hit_at;
    std::map<double, double> recall_at;
    std::optional<double> latency_ms_per_sample;
    std::uint64_t n_samples = 0;
    std::map<std::string, std::uint64_t> counts; // samples contributing to each metric
    std::vector<double> ple_values;              // per sample, for the CCDF
};

// Arithmetic means over samples in index order; dB metrics averaged in dB.
MetricReport evaluate_samples(std::span<const ApsSpectrum> gt, std::span<const ApsSpectrum> pred, int jobs = 1);

// Brings a prediction into the normalized_linear domain.
ApsSpectrum reconcile_prediction(const ApsSpectrum &pred, const std::optional<NormStats> &stats);

MetricReport evaluate_run(const Manifest &manifest, const std::filesystem::path &pred_file, SplitSide side,
                          int jobs = 1);

nlohmann::json report_to_json(const MetricReport &report);

// P(PLE > t) for each threshold.
std::vector<std::pair<double, double>> ple_ccdf(std::span<const double> ple_values, std::span<const double> thresholds);
std::vector<double> default_ccdf_thresholds();
void write_ccdf_csv(const std::vector<std::pair<double, double>> &ccdf, const std::filesystem::path &path);

using Predictor = std::function<ApsSpectrum(const ConditionImage &)>;

// Milliseconds per sample over one timed pass, after an untimed warm-up pass.
// Needs at least 100 samples.
double measure_latency(const Predictor &predictor, std::span<const ConditionImage> samples);

} // namespace apsbench

#endif
