// SPDX-License-Identifier: Apache-2.0
//
// Angle power spectrum labels: path aggregation with a delay-domain sinc^2
// kernel and a uniform-linear-array response, max over delay per angle bin,
// then the dB max-shift and dataset-level standardization.

#ifndef APSBENCH_APSLABEL_HPP
#define APSBENCH_APSLABEL_HPP

#include "apsbench/raytrace.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace apsbench
{

inline constexpr int k_aps_bins = 180;
inline constexpr double k_bin_width_deg = 2.0;
inline constexpr double k_min_linear = 1e-30; // -300 dB floor
inline constexpr double k_db_floor = -300.0;
inline constexpr double k_min_std = 1e-12;

// Center of bin j: -180 + 2 j degrees.
constexpr double bin_center_deg(int j) { return -180.0 + k_bin_width_deg * j; }

enum class Domain : std::uint8_t
{
    raw_linear = 0,
    normalized_linear = 1,
    standardized = 2,
};

const char *to_string(Domain d);

struct ApsSpectrum
{
    std::array<double, k_aps_bins> bins{};
    Domain domain = Domain::raw_linear;

    double max() const;
    friend bool operator==(const ApsSpectrum &, const ApsSpectrum &) = default;
};

struct KernelConfig
{
    double fs_hz = 100e6;
    int n_elements = 64;
    double d_lambda = 0.5;
    int delay_oversample = 4;
};

void validate(const KernelConfig &cfg);

// (sin(pi x) / (pi x))^2, equal to 1 at x = 0.
double sinc_sq(double x);

// [sin(N psi) / (N sin psi)]^2 with psi = pi d (sin theta - sin theta_k); 1 when |sin psi| < 1e-12.
double array_factor_sq(double theta_deg, double theta_k_deg, int n_elements, double d_lambda);

// Q(tau, theta) = sum_k p_k sinc^2(f_s (tau - tau_k)) AF^2(theta, theta_k).
double aggregate_q(std::span<const PathRecord> paths, double tau_s, double theta_deg, const KernelConfig &cfg);

// Delays at which Q is maximized: every path delay plus a uniform grid over
// [min tau_k, max tau_k] with step 1 / (delay_oversample f_s).
std::vector<double> delay_grid(std::span<const PathRecord> paths, const KernelConfig &cfg);

// a(theta_j) = max over the delay grid of Q(tau, theta_j). Throws
// Error("label", ...) for an empty path list.
ApsSpectrum build_aps(std::span<const PathRecord> paths, const KernelConfig &cfg);

// dB conversion, shift by the sample maximum, clamp at -300 dB, back to linear.
ApsSpectrum normalize_db(const ApsSpectrum &raw);

struct NormStats
{
    double mu_a = 0.0;
    double s_a = 1.0;
};

// Scalar mean and population standard deviation over every bin of every label.
NormStats compute_dataset_stats(std::span<const ApsSpectrum> training_labels);

ApsSpectrum standardize(const ApsSpectrum &aps, const NormStats &stats);
// Inverse of standardize, clamped into [1e-30, 1].
ApsSpectrum destandardize(const ApsSpectrum &aps, const NormStats &stats);

} // namespace apsbench

#endif
