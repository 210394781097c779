// SPDX-License-Identifier: Apache-2.0
//
// Non-learned predictors used to validate the evaluation harness and bracket
// achievable scores. All emit normalized_linear APSL rows in split order.

#ifndef APSBENCH_BASELINES_HPP
#define APSBENCH_BASELINES_HPP

#include "apsbench/datasetio.hpp"
#include "apsbench/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace apsbench
{

enum class BaselineKind
{
    uniform,  // every bin 1
    los_beam, // array lobe at the strongest recorded path's arrival angle
    oracle,   // re-traced and re-labelled ground truth
};

BaselineKind parse_baseline_kind(const std::string &s);
const char *to_string(BaselineKind kind);

ApsSpectrum uniform_prediction();

// Normalized label of a single unit-power path arriving from aoa_deg.
ApsSpectrum beam_prediction(double aoa_deg, const KernelConfig &kernel);

std::vector<ApsSpectrum> predict_baseline(BaselineKind kind, const Manifest &manifest, SplitSide side, int jobs = 1);

void write_baseline(BaselineKind kind, const Manifest &manifest, SplitSide side, const std::filesystem::path &out,
                    int jobs = 1);

// Condition-image-only variant for latency measurement. los_beam points the lobe
// along the bearing between the heatmap peaks; the oracle needs path records and
// is rejected.
Predictor condition_predictor(BaselineKind kind, const DatasetParams &params);

} // namespace apsbench

#endif
