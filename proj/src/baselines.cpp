// SPDX-License-Identifier: Apache-2.0

#include "apsbench/baselines.hpp"

#include "apsbench/apsl_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace apsbench
{

namespace
{

double bearing_deg(Point from, Point to)
{
    return wrap_angle_deg(std::atan2(to.y - from.y, to.x - from.x) * 180.0 / std::numbers::pi);
}

std::vector<ApsSpectrum> predict_los_beam(const Manifest &manifest, SplitSide side)
{
    std::vector<ApsSpectrum> out;
    for (int id : side_map_ids(manifest, side))
    {
        const MapEntry &e = manifest.map_entry(id);
        const auto path_file = manifest.root / e.paths_file;
        if (!std::filesystem::exists(path_file))
            throw Error("baseline", "los_beam: missing path records for map " + std::to_string(id));
        std::unordered_map<std::uint64_t, std::vector<PathRecord>> by_link;
        for (auto &lp : load_paths_csv(path_file))
            by_link[lp.link_id] = std::move(lp.paths);

        for (const auto &s : map_samples(e))
        {
            double aoa;
            const auto it = by_link.find(s.link_id);
            if (it != by_link.end() && !it->second.empty())
            {
                const auto best = std::max_element(it->second.begin(), it->second.end(),
                                                   [](const PathRecord &a, const PathRecord &b) {
                                                       return a.power_lin < b.power_lin;
                                                   });
                aoa = best->aoa_deg;
            }
            else
            {
                aoa = bearing_deg(e.rx[s.rx_index], e.tx[s.tx_index]);
            }
            out.push_back(beam_prediction(aoa, manifest.params.kernel));
        }
    }
    return out;
}

std::vector<ApsSpectrum> predict_oracle(const Manifest &manifest, SplitSide side, int jobs)
{
    const auto samples = side_samples(manifest, side);
    std::unordered_map<int, UrbanMap> maps;
    for (int id : side_map_ids(manifest, side))
    {
        const auto map_file = manifest.root / manifest.map_entry(id).map_file;
        if (!std::filesystem::exists(map_file))
            throw Error("baseline", "oracle: missing map file for map " + std::to_string(id));
        maps.emplace(id, load_map_json(map_file));
    }
    std::unordered_map<int, LinkTracer> tracers;
    for (const auto &[id, map] : maps)
        tracers.emplace(id, LinkTracer(map, manifest.params.trace));

    std::vector<ApsSpectrum> out(samples.size());
    parallel_for(samples.size(), jobs, [&](std::size_t i) {
        const auto &s = samples[i];
        const MapEntry &e = manifest.map_entry(s.map_id);
        const auto traced = tracers.at(s.map_id).trace(e.tx[s.tx_index], e.rx[s.rx_index]);
        if (traced.empty())
            throw Error("baseline", "oracle: map " + std::to_string(s.map_id) + " link " +
                                        std::to_string(s.link_id) + " has no paths but is listed as valid");
        std::vector<PathRecord> records;
        for (const auto &p : traced)
            records.push_back(p.record);
        out[i] = normalize_db(build_aps(records, manifest.params.kernel));
    });
    return out;
}

} // namespace

BaselineKind parse_baseline_kind(const std::string &s)
{
    if (s == "uniform")
        return BaselineKind::uniform;
    if (s == "los_beam")
        return BaselineKind::los_beam;
    if (s == "oracle")
        return BaselineKind::oracle;
    throw Error("baseline", "unknown baseline kind '" + s + "' (expected uniform, los_beam or oracle)");
}

const char *to_string(BaselineKind kind)
{
    switch (kind)
    {
    case BaselineKind::uniform:
        return "uniform";
    case BaselineKind::los_beam:
        return "los_beam";
    case BaselineKind::oracle:
        return "oracle";
    }
    return "unknown";
}

ApsSpectrum uniform_prediction()
{
    ApsSpectrum a;
    a.domain = Domain::normalized_linear;
    a.bins.fill(1.0);
    return a;
}

ApsSpectrum beam_prediction(double aoa_deg, const KernelConfig &kernel)
{
    const PathRecord single{1.0, wrap_angle_deg(aoa_deg), 1.0};
    return normalize_db(build_aps(std::span(&single, 1), kernel));
}

std::vector<ApsSpectrum> predict_baseline(BaselineKind kind, const Manifest &manifest, SplitSide side, int jobs)
{
    switch (kind)
    {
    case BaselineKind::uniform:
        return std::vector<ApsSpectrum>(side_samples(manifest, side).size(), uniform_prediction());
    case BaselineKind::los_beam:
        return predict_los_beam(manifest, side);
    case BaselineKind::oracle:
        return predict_oracle(manifest, side, jobs);
    }
    throw Error("baseline", "unknown baseline kind");
}

void write_baseline(BaselineKind kind, const Manifest &manifest, SplitSide side, const std::filesystem::path &out,
                    int jobs)
{
    const auto rows = predict_baseline(kind, manifest, side, jobs);
    if (out.has_parent_path())
        std::filesystem::create_directories(out.parent_path());
    write_apsl(out, rows, Domain::normalized_linear);
}

Predictor condition_predictor(BaselineKind kind, const DatasetParams &params)
{
    switch (kind)
    {
    case BaselineKind::uniform:
        return [](const ConditionImage &) { return uniform_prediction(); };
    case BaselineKind::los_beam:
        return [params](const ConditionImage &c) {
            auto peak_point = [&](int channel) {
                const auto ch = c.channel(channel);
                const auto idx = static_cast<int>(std::max_element(ch.begin(), ch.end()) - ch.begin());
                const double res = params.map.resolution_m;
                return Point{(idx % c.W + 0.5) * res, (idx / c.W + 0.5) * res};
            };
            const Point tx = peak_point(1);
            const Point rx = peak_point(2);
            return beam_prediction(tx == rx ? 0.0 : bearing_deg(rx, tx), params.kernel);
        };
    case BaselineKind::oracle:
        break;
    }
    throw Error("bench", "the oracle baseline needs path records and cannot run on condition images alone");
}

} // namespace apsbench
