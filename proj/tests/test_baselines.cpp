// SPDX-License-Identifier: Apache-2.0

#include "apsbench/apsl_io.hpp"
#include "apsbench/baselines.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace apsbench;
namespace fs = std::filesystem;

namespace
{

Manifest split_dataset(const fs::path &root, double drop_prob, std::uint64_t seed)
{
    BuildOptions o;
    o.n_maps = 4;
    o.n_tx = 5;
    o.n_rx = 20;
    o.seed = seed;
    o.params.map.drop_prob = drop_prob;
    build_dataset(root, o);
    auto m = make_split(load_manifest(root), {0, 1}, {2, 3});
    save_manifest(m);
    return load_manifest(root);
}

} // namespace

TEST_CASE("baseline kinds parse")
{
    CHECK(parse_baseline_kind("uniform") == BaselineKind::uniform);
    CHECK(parse_baseline_kind("los_beam") == BaselineKind::los_beam);
    CHECK(parse_baseline_kind("oracle") == BaselineKind::oracle);
    CHECK(std::string(to_string(BaselineKind::los_beam)) == "los_beam");
    CHECK_THROWS_AS(parse_baseline_kind("cnn"), Error);
}

TEST_CASE("uniform cosine against a one-peak label")
{
    ApsSpectrum a;
    a.domain = Domain::normalized_linear;
    a.bins.fill(1e-30);
    for (int j = 40; j <= 50; ++j)
        a.bins[j] = std::exp(-0.1 * (j - 45) * (j - 45));
    double sum = 0.0, norm2 = 0.0;
    for (const double v : a.bins)
    {
        sum += v;
        norm2 += v * v;
    }
    const double want = sum / (std::sqrt(180.0) * std::sqrt(norm2));
    CHECK(std::abs(reconstruction_metrics(a, uniform_prediction()).cossim - want) <= 1e-12);
}

TEST_CASE("oracle baseline is a fixed point of the pipeline")
{
    testutil::TempDir dir("oracle");
    const auto m = split_dataset(dir.path(), 0.5, 11);
    write_baseline(BaselineKind::oracle, m, SplitSide::test, dir / "oracle.apsl");
    // the written file equals the stored labels bit for bit
    std::vector<ApsSpectrum> stored;
    for (int id : {2, 3})
    {
        const auto rows = read_apsl(dir.path() / m.map_entry(id).labels_file);
        stored.insert(stored.end(), rows.begin(), rows.end());
    }
    CHECK(read_apsl(dir / "oracle.apsl") == stored);

    const auto r = evaluate_run(m, dir / "oracle.apsl", SplitSide::test);
    CHECK(r.mae <= 1e-9);
    CHECK(r.cossim >= 1.0 - 1e-9);
    CHECK(r.ple_deg == 0.0);
    CHECK(r.hit_at.at(2.0) == 1.0);
    CHECK(r.recall_at.at(2.0) == 1.0);
    CHECK(r.nmse_db == -300.0);
    CHECK(r.psnr_db == 300.0);

    write_baseline(BaselineKind::uniform, m, SplitSide::test, dir / "uniform.apsl");
    const auto u = evaluate_run(m, dir / "uniform.apsl", SplitSide::test);
    CHECK(r.cossim > u.cossim);
    CHECK(r.mae < u.mae);
    CHECK(r.ple_deg < u.ple_deg);
}

TEST_CASE("los_beam on an empty scene finds every peak")
{
    testutil::TempDir dir("losbeam");
    const auto m = split_dataset(dir.path(), 1.0, 12);
    write_baseline(BaselineKind::los_beam, m, SplitSide::test, dir / "beam.apsl");
    const auto gt = load_side_labels(m, SplitSide::test);
    const auto pred = read_apsl(dir / "beam.apsl");
    REQUIRE(pred.size() == gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i)
    {
        CHECK(ple(gt[i], pred[i]) == 0.0);
        CHECK(recall_at(gt[i], pred[i], 4.0) == 1.0);
    }
}

TEST_CASE("los_beam misses reflected dominant peaks in built-up scenes")
{
    testutil::TempDir dir("losbeam_city");
    const auto m = split_dataset(dir.path(), 0.3, 13);
    write_baseline(BaselineKind::los_beam, m, SplitSide::test, dir / "beam.apsl");
    const auto r = evaluate_run(m, dir / "beam.apsl", SplitSide::test);
    CHECK(r.recall_at.at(4.0) < 1.0);
    CHECK(r.recall_at.at(4.0) > 0.0);
}

TEST_CASE("baselines need their inputs")
{
    testutil::TempDir dir("missing");
    const auto m = split_dataset(dir.path(), 0.5, 14);
    fs::remove(dir.path() / m.map_entry(3).paths_file);
    CHECK_THROWS_AS(predict_baseline(BaselineKind::los_beam, m, SplitSide::test), Error);
    fs::remove(dir.path() / m.map_entry(2).map_file);
    CHECK_THROWS_AS(predict_baseline(BaselineKind::oracle, m, SplitSide::test), Error);
    // uniform needs neither
    CHECK(predict_baseline(BaselineKind::uniform, m, SplitSide::test).size() ==
          side_samples(m, SplitSide::test).size());
}

TEST_CASE("condition-image predictors")
{
    DatasetParams params;
    UrbanMap map;
    map.width_m = map.height_m = 512;
    map.resolution_m = 2;
    const auto raster = rasterize(map, 256, 256);
    const auto img = build_condition(raster, {101, 201}, {301, 201}, params.heatmap, 2.0);

    const auto beam = condition_predictor(BaselineKind::los_beam, params)(img);
    const auto want = beam_prediction(180.0, params.kernel);
    CHECK(beam == want);
    CHECK(condition_predictor(BaselineKind::uniform, params)(img) == uniform_prediction());
    CHECK_THROWS_AS(condition_predictor(BaselineKind::oracle, params), Error);
}
