// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests, on-disk layout, cross-map splits and the end-to-end build.
//
// Layout under a dataset root:
//   manifest.json, maps/<id>.json, rasters/<id>.pgm, paths/<id>.csv, labels/<id>.apsl

#ifndef APSBENCH_DATASETIO_HPP
#define APSBENCH_DATASETIO_HPP

#include "apsbench/apslabel.hpp"
#include "apsbench/raytrace.hpp"
#include "apsbench/scene.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace apsbench
{

inline constexpr int k_manifest_schema_version = 1;

struct DatasetParams
{
    MapParams map;
    TraceConfig trace;
    KernelConfig kernel;
    HeatmapConfig heatmap;

    int width_px() const;
    int height_px() const;
};

struct MapEntry
{
    int id = 0;
    std::string map_file, raster_file, paths_file, labels_file; // relative to the root
    std::vector<Point> tx, rx;
    std::vector<std::uint64_t> dropped_links; // ascending link ids without any path

    std::uint64_t n_links() const { return static_cast<std::uint64_t>(tx.size()) * rx.size(); }
    std::uint64_t n_valid() const { return n_links() - dropped_links.size(); }
};

struct SplitSpec
{
    std::vector<int> train_map_ids;
    std::vector<int> test_map_ids;
};

struct StoredStats
{
    NormStats stats;
    std::vector<int> train_map_ids; // the split side they were computed from
};

struct Manifest
{
    int schema_version = k_manifest_schema_version;
    std::uint64_t seed = 0;
    DatasetParams params;
    std::vector<MapEntry> maps;
    std::optional<SplitSpec> split;
    std::optional<StoredStats> stats;

    std::filesystem::path root; // not serialized

    const MapEntry &map_entry(int id) const;
};

enum class SplitSide
{
    train,
    test,
};

SplitSide parse_split_side(const std::string &s);
const char *to_string(SplitSide side);

struct BuildOptions
{
    int n_maps = 6;
    int n_tx = 10;
    int n_rx = 50;
    std::uint64_t seed = 0;
    DatasetParams params;
    int jobs = 1;
};

// Generates, traces and labels every map, writes all files and then the
// manifest. Output bytes depend only on (seed, params), never on jobs.
Manifest build_dataset(const std::filesystem::path &root, const BuildOptions &opts);

void save_manifest(const Manifest &manifest);
// Checks that every referenced file exists and that label counts match.
Manifest load_manifest(const std::filesystem::path &root);

// Records a cross-map split; overlapping or unknown ids throw Error("split", ...).
// Any stored statistics are discarded since they belong to the previous split.
Manifest make_split(const Manifest &manifest, const std::vector<int> &train_ids, const std::vector<int> &test_ids);

std::vector<int> side_map_ids(const Manifest &manifest, SplitSide side);

// One valid link of a split side, in the order rows appear in side label files.
struct SampleRef
{
    int map_id = 0;
    int tx_index = 0;
    int rx_index = 0;
    std::uint64_t link_id = 0;
};

std::vector<SampleRef> map_samples(const MapEntry &entry);
std::vector<SampleRef> side_samples(const Manifest &manifest, SplitSide side);
std::vector<ApsSpectrum> load_side_labels(const Manifest &manifest, SplitSide side);

// Scalar statistics from the train side only.
Manifest compute_stats(const Manifest &manifest);

struct PeakStats
{
    std::uint64_t n_samples = 0;
    double mean_peaks = 0.0;
    double frac_at_most_two = 0.0;
    std::map<int, std::uint64_t> histogram; // dominant-peak count -> samples
};

PeakStats dominant_peak_stats(const Manifest &manifest, SplitSide side);
PeakStats peak_stats_from_counts(const std::vector<int> &counts);

} // namespace apsbench

#endif
