// SPDX-License-Identifier: Apache-2.0

#include "apsbench/datasetio.hpp"

#include "apsbench/apsl_io.hpp"
#include "apsbench/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace apsbench
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

json params_to_json(const DatasetParams &p)
{
    return {
        {"fc_hz", p.trace.fc_hz},
        {"c_mps", p.trace.c_mps},
        {"max_order", p.trace.max_order},
        {"refl_loss_db", p.trace.refl_loss_db},
        {"fs_hz", p.kernel.fs_hz},
        {"n_elements", p.kernel.n_elements},
        {"d_lambda", p.kernel.d_lambda},
        {"delay_oversample", p.kernel.delay_oversample},
        {"sigma_px", p.heatmap.sigma_px},
        {"resolution_m", p.map.resolution_m},
        {"H", p.height_px()},
        {"W", p.width_px()},
        {"map_generation",
         {{"width_m", p.map.width_m},
          {"height_m", p.map.height_m},
          {"block_pitch_m", p.map.block_pitch_m},
          {"street_m", p.map.street_m},
          {"max_inset_m", p.map.max_inset_m},
          {"drop_prob", p.map.drop_prob},
          {"split_prob", p.map.split_prob},
          {"alley_m", p.map.alley_m}}},
    };
}

DatasetParams params_from_json(const json &j)
{
    DatasetParams p;
    p.trace.fc_hz = j.at("fc_hz").get<double>();
    p.trace.c_mps = j.at("c_mps").get<double>();
    p.trace.max_order = j.at("max_order").get<int>();
    p.trace.refl_loss_db = j.at("refl_loss_db").get<double>();
    p.kernel.fs_hz = j.at("fs_hz").get<double>();
    p.kernel.n_elements = j.at("n_elements").get<int>();
    p.kernel.d_lambda = j.at("d_lambda").get<double>();
    p.kernel.delay_oversample = j.at("delay_oversample").get<int>();
    p.heatmap.sigma_px = j.at("sigma_px").get<double>();
    p.map.resolution_m = j.at("resolution_m").get<double>();
    const auto &g = j.at("map_generation");
    p.map.width_m = g.at("width_m").get<double>();
    p.map.height_m = g.at("height_m").get<double>();
    p.map.block_pitch_m = g.at("block_pitch_m").get<double>();
    p.map.street_m = g.at("street_m").get<double>();
    p.map.max_inset_m = g.at("max_inset_m").get<double>();
    p.map.drop_prob = g.at("drop_prob").get<double>();
    p.map.split_prob = g.at("split_prob").get<double>();
    p.map.alley_m = g.at("alley_m").get<double>();
    if (j.at("H").get<int>() != p.height_px() || j.at("W").get<int>() != p.width_px())
        throw Error("manifest", "H/W inconsistent with scene extent and resolution");
    return p;
}

json points_to_json(const std::vector<Point> &pts)
{
    json arr = json::array();
    for (const auto &p : pts)
        arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Point> points_from_json(const json &j)
{
    std::vector<Point> out;
    for (const auto &p : j)
        out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

json to_json(const Manifest &m)
{
    json j;
    j["schema_version"] = m.schema_version;
    j["seed"] = m.seed;
    j["params"] = params_to_json(m.params);
    j["maps"] = json::array();
    for (const auto &e : m.maps)
        j["maps"].push_back({{"id", e.id},
                             {"map_file", e.map_file},
                             {"raster_file", e.raster_file},
                             {"paths_file", e.paths_file},
                             {"labels_file", e.labels_file},
                             {"tx", points_to_json(e.tx)},
                             {"rx", points_to_json(e.rx)},
                             {"dropped_links", e.dropped_links}});
    j["split"] = m.split ? json{{"train_map_ids", m.split->train_map_ids}, {"test_map_ids", m.split->test_map_ids}}
                         : json(nullptr);
    j["stats"] = m.stats ? json{{"mu_a", m.stats->stats.mu_a},
                                {"s_a", m.stats->stats.s_a},
                                {"train_map_ids", m.stats->train_map_ids}}
                         : json(nullptr);
    return j;
}

Manifest from_json(const json &j)
{
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != k_manifest_schema_version)
        throw Error("manifest", "unsupported schema_version " + std::to_string(m.schema_version));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.params = params_from_json(j.at("params"));
    for (const auto &e : j.at("maps"))
    {
        MapEntry entry;
        entry.id = e.at("id").get<int>();
        entry.map_file = e.at("map_file").get<std::string>();
        entry.raster_file = e.at("raster_file").get<std::string>();
        entry.paths_file = e.at("paths_file").get<std::string>();
        entry.labels_file = e.at("labels_file").get<std::string>();
        entry.tx = points_from_json(e.at("tx"));
        entry.rx = points_from_json(e.at("rx"));
        entry.dropped_links = e.at("dropped_links").get<std::vector<std::uint64_t>>();
        m.maps.push_back(std::move(entry));
    }
    if (!j.at("split").is_null())
        m.split = SplitSpec{j["split"].at("train_map_ids").get<std::vector<int>>(),
                            j["split"].at("test_map_ids").get<std::vector<int>>()};
    if (!j.at("stats").is_null())
        m.stats = StoredStats{{j["stats"].at("mu_a").get<double>(), j["stats"].at("s_a").get<double>()},
                              j["stats"].at("train_map_ids").get<std::vector<int>>()};
    return m;
}

std::string map_stem(int id) { return std::to_string(id); }

struct MapWork
{
    UrbanMap map;
    EndpointSet endpoints;
};

struct LinkResult
{
    std::vector<PathRecord> paths;
    ApsSpectrum label;
};

} // namespace

int DatasetParams::width_px() const { return static_cast<int>(std::lround(map.width_m / map.resolution_m)); }
int DatasetParams::height_px() const { return static_cast<int>(std::lround(map.height_m / map.resolution_m)); }

const MapEntry &Manifest::map_entry(int id) const
{
    for (const auto &e : maps)
        if (e.id == id)
            return e;
    throw Error("manifest", "unknown map id " + std::to_string(id));
}

SplitSide parse_split_side(const std::string &s)
{
    if (s == "train")
        return SplitSide::train;
    if (s == "test")
        return SplitSide::test;
    throw Error("split", "unknown split side '" + s + "' (expected train or test)");
}

const char *to_string(SplitSide side) { return side == SplitSide::train ? "train" : "test"; }

Manifest build_dataset(const fs::path &root, const BuildOptions &opts)
{
    if (opts.n_maps < 1 || opts.n_tx < 1 || opts.n_rx < 1)
        throw Error("build", "map, tx and rx counts must be positive");
    validate(opts.params.kernel);
    if (!(opts.params.heatmap.sigma_px > 0.0))
        throw Error("build", "sigma_px must be positive");

    const int n_maps = opts.n_maps;
    std::vector<MapWork> work(n_maps);
    parallel_for(n_maps, opts.jobs, [&](std::size_t i) {
        const int id = static_cast<int>(i);
        try
        {
            work[i].map = generate_map(mix_seed(opts.seed, 2 * i), opts.params.map, id);
            work[i].endpoints = sample_endpoints(work[i].map, opts.n_tx, opts.n_rx, mix_seed(opts.seed, 2 * i + 1));
        }
        catch (const Error &e)
        {
            throw Error("build", "map " + std::to_string(id) + ": " + e.what());
        }
    });

    std::vector<LinkTracer> tracers;
    tracers.reserve(n_maps);
    for (const auto &w : work)
        tracers.emplace_back(w.map, opts.params.trace);

    const std::size_t links_per_map = static_cast<std::size_t>(opts.n_tx) * opts.n_rx;
    std::vector<std::optional<LinkResult>> results(n_maps * links_per_map);
    parallel_for(results.size(), opts.jobs, [&](std::size_t flat) {
        const std::size_t m = flat / links_per_map;
        const std::size_t link = flat % links_per_map;
        const int t = static_cast<int>(link / opts.n_rx);
        const int r = static_cast<int>(link % opts.n_rx);
        try
        {
            auto traced = tracers[m].trace(work[m].endpoints.tx[t], work[m].endpoints.rx[r]);
            if (traced.empty())
                return;
            LinkResult res;
            for (const auto &p : traced)
                res.paths.push_back(p.record);
            res.label = normalize_db(build_aps(res.paths, opts.params.kernel));
            results[flat] = std::move(res);
        }
        catch (const Error &e)
        {
            throw Error("build", "map " + std::to_string(m) + " link " + std::to_string(link) + ": " + e.what());
        }
    });

    fs::create_directories(root / "maps");
    fs::create_directories(root / "rasters");
    fs::create_directories(root / "paths");
    fs::create_directories(root / "labels");

    Manifest manifest;
    manifest.seed = opts.seed;
    manifest.params = opts.params;
    manifest.root = root;
    manifest.maps.resize(n_maps);
    parallel_for(n_maps, opts.jobs, [&](std::size_t m) {
        MapEntry &e = manifest.maps[m];
        e.id = static_cast<int>(m);
        const std::string stem = map_stem(e.id);
        e.map_file = "maps/" + stem + ".json";
        e.raster_file = "rasters/" + stem + ".pgm";
        e.paths_file = "paths/" + stem + ".csv";
        e.labels_file = "labels/" + stem + ".apsl";
        e.tx = work[m].endpoints.tx;
        e.rx = work[m].endpoints.rx;

        std::vector<LinkPaths> paths;
        std::vector<ApsSpectrum> labels;
        for (std::size_t link = 0; link < links_per_map; ++link)
        {
            auto &res = results[m * links_per_map + link];
            if (!res)
            {
                e.dropped_links.push_back(link);
                continue;
            }
            paths.push_back({link, std::move(res->paths)});
            labels.push_back(res->label);
        }
        save_map_json(work[m].map, root / e.map_file);
        save_raster_pgm(rasterize(work[m].map, opts.params.height_px(), opts.params.width_px()), root / e.raster_file);
        save_paths_csv(paths, root / e.paths_file);
        write_apsl(root / e.labels_file, labels, Domain::normalized_linear);
    });

    save_manifest(manifest);
    return manifest;
}

void save_manifest(const Manifest &manifest)
{
    const fs::path path = manifest.root / "manifest.json";
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << to_json(manifest).dump(2) << '\n';
}

Manifest load_manifest(const fs::path &root)
{
    const fs::path path = root / "manifest.json";
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("manifest", "missing manifest " + path.string());
    Manifest m;
    try
    {
        m = from_json(json::parse(is));
    }
    catch (const json::exception &e)
    {
        throw Error("manifest", "malformed manifest " + path.string() + ": " + e.what());
    }
    m.root = root;

    for (const auto &e : m.maps)
    {
        for (const auto *f : {&e.map_file, &e.raster_file, &e.paths_file, &e.labels_file})
            if (!fs::exists(root / *f))
                throw Error("manifest", "map " + std::to_string(e.id) + ": missing file " + *f);
        const auto header = read_apsl_header(root / e.labels_file);
        if (header.count != e.n_valid())
            throw Error("manifest", "map " + std::to_string(e.id) + ": label count " + std::to_string(header.count) +
                                        " != valid links " + std::to_string(e.n_valid()));
    }
    if (m.stats && (!m.split || m.stats->train_map_ids != m.split->train_map_ids))
        throw Error("manifest", "stored statistics do not belong to the current train split");
    return m;
}

Manifest make_split(const Manifest &manifest, const std::vector<int> &train_ids, const std::vector<int> &test_ids)
{
    std::set<int> known;
    for (const auto &e : manifest.maps)
        known.insert(e.id);
    std::set<int> train(train_ids.begin(), train_ids.end());
    std::set<int> test(test_ids.begin(), test_ids.end());
    if (train.size() != train_ids.size() || test.size() != test_ids.size())
        throw Error("split", "duplicate map id in split");
    if (train.empty() || test.empty())
        throw Error("split", "both split sides need at least one map");
    for (int id : train)
    {
        if (test.count(id))
            throw Error("split", "map " + std::to_string(id) + " appears in both train and test (overlap)");
    }
    for (const auto *side : {&train, &test})
        for (int id : *side)
            if (!known.count(id))
                throw Error("split", "unknown map id " + std::to_string(id));

    Manifest out = manifest;
    out.split = SplitSpec{{train.begin(), train.end()}, {test.begin(), test.end()}};
    out.stats.reset();
    return out;
}

std::vector<int> side_map_ids(const Manifest &manifest, SplitSide side)
{
    if (!manifest.split)
        throw Error("split", "manifest has no split; run `split` first");
    return side == SplitSide::train ? manifest.split->train_map_ids : manifest.split->test_map_ids;
}

std::vector<SampleRef> map_samples(const MapEntry &e)
{
    std::vector<SampleRef> out;
    const int n_rx = static_cast<int>(e.rx.size());
    auto dropped = e.dropped_links.begin();
    for (std::uint64_t link = 0; link < e.n_links(); ++link)
    {
        if (dropped != e.dropped_links.end() && *dropped == link)
        {
            ++dropped;
            continue;
        }
        out.push_back({e.id, static_cast<int>(link / n_rx), static_cast<int>(link % n_rx), link});
    }
    return out;
}

std::vector<SampleRef> side_samples(const Manifest &manifest, SplitSide side)
{
    std::vector<SampleRef> out;
    for (int id : side_map_ids(manifest, side))
    {
        auto part = map_samples(manifest.map_entry(id));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<ApsSpectrum> load_side_labels(const Manifest &manifest, SplitSide side)
{
    std::vector<ApsSpectrum> out;
    for (int id : side_map_ids(manifest, side))
    {
        auto rows = read_apsl(manifest.root / manifest.map_entry(id).labels_file);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

Manifest compute_stats(const Manifest &manifest)
{
    Manifest out = manifest;
    const auto labels = load_side_labels(manifest, SplitSide::train);
    out.stats = StoredStats{compute_dataset_stats(labels), side_map_ids(manifest, SplitSide::train)};
    return out;
}

PeakStats peak_stats_from_counts(const std::vector<int> &counts)
{
    PeakStats s;
    s.n_samples = counts.size();
    std::uint64_t total = 0, at_most_two = 0;
    for (int c : counts)
    {
        total += static_cast<std::uint64_t>(c);
        at_most_two += c <= 2 ? 1 : 0;
        ++s.histogram[c];
    }
    if (!counts.empty())
    {
        s.mean_peaks = static_cast<double>(total) / static_cast<double>(counts.size());
        s.frac_at_most_two = static_cast<double>(at_most_two) / static_cast<double>(counts.size());
    }
    return s;
}

PeakStats dominant_peak_stats(const Manifest &manifest, SplitSide side)
{
    const auto labels = load_side_labels(manifest, side);
    std::vector<int> counts;
    counts.reserve(labels.size());
    for (const auto &label : labels)
        counts.push_back(static_cast<int>(detect_peaks(label, true).retained().size()));
    return peak_stats_from_counts(counts);
}

} // namespace apsbench
