// SPDX-License-Identifier: Apache-2.0

#include "apsbench/apslabel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace apsbench
{

namespace
{

constexpr double k_deg = std::numbers::pi / 180.0;

void require_domain(const ApsSpectrum &aps, Domain expected, const char *op)
{
    if (aps.domain != expected)
        throw Error("label", std::string(op) + ": expected " + to_string(expected) + " spectrum, got " +
                                 to_string(aps.domain));
}

} // namespace

const char *to_string(Domain d)
{
    switch (d)
    {
    case Domain::raw_linear:
        return "raw_linear";
    case Domain::normalized_linear:
        return "normalized_linear";
    case Domain::standardized:
        return "standardized";
    }
    return "unknown";
}

double ApsSpectrum::max() const { return *std::max_element(bins.begin(), bins.end()); }

void validate(const KernelConfig &cfg)
{
    if (!(cfg.fs_hz > 0.0) || cfg.n_elements < 1 || !(cfg.d_lambda > 0.0) || cfg.delay_oversample < 1)
        throw Error("label", "invalid kernel configuration");
}

double sinc_sq(double x)
{
    if (x == 0.0)
        return 1.0;
    const double s = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    return s * s;
}

double array_factor_sq(double theta_deg, double theta_k_deg, int n_elements, double d_lambda)
{
    const double psi = std::numbers::pi * d_lambda * (std::sin(theta_deg * k_deg) - std::sin(theta_k_deg * k_deg));
    const double s = std::sin(psi);
    if (std::abs(s) < 1e-12)
        return 1.0;
    const double r = std::sin(n_elements * psi) / (n_elements * s);
    return r * r;
}

double aggregate_q(std::span<const PathRecord> paths, double tau_s, double theta_deg, const KernelConfig &cfg)
{
    double q = 0.0;
    for (const auto &p : paths)
        q += p.power_lin * sinc_sq(cfg.fs_hz * (tau_s - p.tau_s)) *
             array_factor_sq(theta_deg, p.aoa_deg, cfg.n_elements, cfg.d_lambda);
    return q;
}

std::vector<double> delay_grid(std::span<const PathRecord> paths, const KernelConfig &cfg)
{
    std::vector<double> grid;
    if (paths.empty())
        return grid;
    double lo = paths.front().tau_s, hi = lo;
    for (const auto &p : paths)
    {
        grid.push_back(p.tau_s);
        lo = std::min(lo, p.tau_s);
        hi = std::max(hi, p.tau_s);
    }
    const double step = 1.0 / (cfg.delay_oversample * cfg.fs_hz);
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step));
    for (std::size_t i = 0; i <= n; ++i)
        grid.push_back(lo + static_cast<double>(i) * step);
    return grid;
}

ApsSpectrum build_aps(std::span<const PathRecord> paths, const KernelConfig &cfg)
{
    validate(cfg);
    if (paths.empty())
        throw Error("label", "invalid link: no propagation paths");

    const std::size_t K = paths.size();
    // Angular responses do not depend on delay; tabulate once per path.
    std::vector<double> af(K * k_aps_bins);
    for (std::size_t k = 0; k < K; ++k)
        for (int j = 0; j < k_aps_bins; ++j)
            af[k * k_aps_bins + j] = array_factor_sq(bin_center_deg(j), paths[k].aoa_deg, cfg.n_elements, cfg.d_lambda);

    ApsSpectrum out;
    out.domain = Domain::raw_linear;
    out.bins.fill(-std::numeric_limits<double>::infinity());
    std::vector<double> weight(K);
    for (const double tau : delay_grid(paths, cfg))
    {
        for (std::size_t k = 0; k < K; ++k)
            weight[k] = paths[k].power_lin * sinc_sq(cfg.fs_hz * (tau - paths[k].tau_s));
        for (int j = 0; j < k_aps_bins; ++j)
        {
            double q = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                q += weight[k] * af[k * k_aps_bins + j];
            out.bins[j] = std::max(out.bins[j], q);
        }
    }
    return out;
}

ApsSpectrum normalize_db(const ApsSpectrum &raw)
{
    require_domain(raw, Domain::raw_linear, "normalize_db");
    std::array<double, k_aps_bins> db{};
    double peak = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k_aps_bins; ++j)
    {
        const double v = raw.bins[j];
        if (v < 0.0 || std::isnan(v))
            throw Error("label", "normalize_db: negative or NaN bin");
        db[j] = v > 0.0 ? 10.0 * std::log10(v) : -std::numeric_limits<double>::infinity();
        peak = std::max(peak, db[j]);
    }
    if (!std::isfinite(peak))
        throw Error("label", "normalize_db: all-zero spectrum");

    ApsSpectrum out;
    out.domain = Domain::normalized_linear;
    for (int j = 0; j < k_aps_bins; ++j)
    {
        const double shifted = std::max(db[j] - peak, k_db_floor);
        out.bins[j] = shifted == 0.0 ? 1.0 : std::pow(10.0, shifted / 10.0);
    }
    return out;
}

NormStats compute_dataset_stats(std::span<const ApsSpectrum> training_labels)
{
    if (training_labels.empty())
        throw Error("stats", "no training labels");
    // Welford accumulation in sample order.
    double mean = 0.0, m2 = 0.0;
    std::uint64_t n = 0;
    for (const auto &label : training_labels)
    {
        require_domain(label, Domain::normalized_linear, "compute_dataset_stats");
        for (const double v : label.bins)
        {
            ++n;
            const double delta = v - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (v - mean);
        }
    }
    return {mean, std::max(std::sqrt(m2 / static_cast<double>(n)), k_min_std)};
}

ApsSpectrum standardize(const ApsSpectrum &aps, const NormStats &stats)
{
    require_domain(aps, Domain::normalized_linear, "standardize");
    ApsSpectrum out;
    out.domain = Domain::standardized;
    for (int j = 0; j < k_aps_bins; ++j)
        out.bins[j] = (aps.bins[j] - stats.mu_a) / stats.s_a;
    return out;
}

ApsSpectrum destandardize(const ApsSpectrum &aps, const NormStats &stats)
{
    require_domain(aps, Domain::standardized, "destandardize");
    ApsSpectrum out;
    out.domain = Domain::normalized_linear;
    for (int j = 0; j < k_aps_bins; ++j)
        out.bins[j] = std::clamp(aps.bins[j] * stats.s_a + stats.mu_a, k_min_linear, 1.0);
    return out;
}

} // namespace apsbench
