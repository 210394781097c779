// SPDX-License-Identifier: Apache-2.0

#include "apsbench/cli.hpp"

#include "apsbench/apsl_io.hpp"
#include "apsbench/baselines.hpp"
#include "apsbench/datasetio.hpp"
#include "apsbench/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace apsbench
{

namespace fs = std::filesystem;

std::vector<int> parse_id_list(const std::string &text)
{
    std::vector<int> ids;
    std::stringstream ss(text);
    std::string item;
    auto to_int = [&](const std::string &s) {
        std::size_t used = 0;
        int v = -1;
        try
        {
            v = std::stoi(s, &used);
        }
        catch (const std::exception &)
        {
            used = 0;
        }
        if (used != s.size() || s.empty() || v < 0)
            throw CLI::ValidationError("ids", "malformed map id list '" + text + "'");
        return v;
    };
    while (std::getline(ss, item, ','))
    {
        const auto dash = item.find('-');
        if (dash == std::string::npos)
        {
            ids.push_back(to_int(item));
            continue;
        }
        const int lo = to_int(item.substr(0, dash));
        const int hi = to_int(item.substr(dash + 1));
        if (hi < lo)
            throw CLI::ValidationError("ids", "descending range in '" + text + "'");
        for (int v = lo; v <= hi; ++v)
            ids.push_back(v);
    }
    if (ids.empty())
        throw CLI::ValidationError("ids", "empty map id list");
    return ids;
}

namespace
{

void write_json_file(const nlohmann::json &j, const fs::path &path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os << j.dump(2) << '\n';
}

// Dropped links are expected; everything else is a broken dataset.
std::vector<ConditionImage> bench_samples(const Manifest &manifest, SplitSide side, std::size_t count)
{
    const auto samples = side_samples(manifest, side);
    if (samples.empty())
        throw Error("bench", "split side has no samples");
    std::vector<ConditionImage> out;
    std::optional<int> loaded_id;
    Raster raster;
    for (std::size_t i = 0; i < count; ++i)
    {
        const auto &s = samples[i % samples.size()];
        if (loaded_id != s.map_id)
        {
            raster = load_raster_pgm(manifest.root / manifest.map_entry(s.map_id).raster_file);
            loaded_id = s.map_id;
        }
        const MapEntry &e = manifest.map_entry(s.map_id);
        out.push_back(build_condition(raster, e.tx[s.tx_index], e.rx[s.rx_index], manifest.params.heatmap,
                                      manifest.params.map.resolution_m));
    }
    return out;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"apsbench: angle-power-spectrum benchmark builder and evaluator", "apsbench"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--jobs", jobs, "Worker threads (never changes outputs)")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Dataset directory")->envname("APSBENCH_OUT");

    // gen
    auto *gen = app.add_subcommand("gen", "Build a dataset: maps, rasters, path records, labels, manifest");
    BuildOptions build;
    gen->add_option("--maps", build.n_maps, "Number of maps")->required()->check(CLI::PositiveNumber);
    gen->add_option("--tx", build.n_tx, "Transmitters per map")->required()->check(CLI::PositiveNumber);
    gen->add_option("--rx", build.n_rx, "Receivers per map")->required()->check(CLI::PositiveNumber);
    gen->add_option("--drop-prob", build.params.map.drop_prob, "Probability a block has no building")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--max-order", build.params.trace.max_order, "Maximum reflection order")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--sigma-px", build.params.heatmap.sigma_px, "Heatmap spread in pixels")
        ->check(CLI::PositiveNumber);

    // split
    auto *split = app.add_subcommand("split", "Assign maps to train/test sides");
    std::string train_ids, test_ids;
    split->add_option("--train", train_ids, "Train map ids, e.g. 0-3")->required();
    split->add_option("--test", test_ids, "Test map ids, e.g. 4,5")->required();

    auto *stats = app.add_subcommand("stats", "Compute standardization statistics from the train side");

    std::string side_name = "test";
    auto *peaks = app.add_subcommand("peaks", "Dominant-peak statistics of a split side");
    peaks->add_option("--split", side_name, "train or test")->check(CLI::IsMember({"train", "test"}));

    auto *baseline = app.add_subcommand("baseline", "Write baseline predictions as APSL");
    std::string kind_name;
    std::string pred_out;
    baseline->add_option("--kind", kind_name, "uniform, los_beam or oracle")
        ->required()
        ->check(CLI::IsMember({"uniform", "los_beam", "oracle"}));
    baseline->add_option("--split", side_name, "train or test")->check(CLI::IsMember({"train", "test"}));
    baseline->add_option("--pred-out", pred_out, "Output file (default <out>/predictions/<kind>_<split>.apsl)");

    auto *evaluate = app.add_subcommand("evaluate", "Score an APSL prediction file");
    std::string pred_file, ccdf_file, report_file;
    bool print_json = false;
    evaluate->add_option("--pred", pred_file, "Prediction file")->required();
    evaluate->add_option("--split", side_name, "train or test")->check(CLI::IsMember({"train", "test"}));
    evaluate->add_option("--ccdf", ccdf_file, "Write the PLE CCDF as CSV");
    evaluate->add_option("--report", report_file, "Report path (default <out>/reports/<pred stem>_<split>.json)");
    evaluate->add_flag("--json", print_json, "Print the report JSON on stdout");

    auto *bench = app.add_subcommand("bench", "Per-sample latency of a condition-image predictor");
    std::string bench_kind;
    int bench_n = 200;
    bench->add_option("--pred-kind", bench_kind, "uniform or los_beam")
        ->required()
        ->check(CLI::IsMember({"uniform", "los_beam", "oracle"}));
    bench->add_option("--split", side_name, "train or test")->check(CLI::IsMember({"train", "test"}));
    bench->add_option("--samples", bench_n, "Timed samples (>= 100)")->check(CLI::Range(100, 10000000));

    std::vector<int> train_list, test_list;
    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (split->parsed())
        {
            train_list = parse_id_list(train_ids);
            test_list = parse_id_list(test_ids);
        }
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return k_exit_ok;
    }
    catch (const CLI::ParseError &e)
    {
        err << "apsbench: usage: " << e.what() << '\n';
        return k_exit_usage;
    }

    const fs::path root = out_dir;
    build.seed = seed;
    build.jobs = jobs;

    try
    {
        if (gen->parsed())
        {
            const auto manifest = build_dataset(root, build);
            std::uint64_t valid = 0, dropped = 0;
            for (const auto &e : manifest.maps)
            {
                valid += e.n_valid();
                dropped += e.dropped_links.size();
            }
            out << "gen: " << manifest.maps.size() << " maps, " << valid << " valid links, " << dropped
                << " dropped\n";
            return k_exit_ok;
        }

        const Manifest manifest = load_manifest(root);
        const SplitSide side = parse_split_side(side_name);

        if (split->parsed())
        {
            const auto updated = make_split(manifest, train_list, test_list);
            save_manifest(updated);
            out << "split: " << side_samples(updated, SplitSide::train).size() << " train samples, "
                << side_samples(updated, SplitSide::test).size() << " test samples\n";
        }
        else if (stats->parsed())
        {
            const auto updated = compute_stats(manifest);
            save_manifest(updated);
            out << "stats: mu_a=" << format_double(updated.stats->stats.mu_a)
                << " s_a=" << format_double(updated.stats->stats.s_a) << '\n';
        }
        else if (peaks->parsed())
        {
            const auto s = dominant_peak_stats(manifest, side);
            nlohmann::json j;
            j["split"] = to_string(side);
            j["n_samples"] = s.n_samples;
            j["mean_peaks"] = s.mean_peaks;
            j["frac_at_most_two"] = s.frac_at_most_two;
            for (const auto &[count, n] : s.histogram)
                j["histogram"][std::to_string(count)] = n;
            j["reference_full_scale"] = {{"mean_peaks", 2.28}, {"frac_at_most_two", 0.75}};
            out << j.dump(2) << '\n';
        }
        else if (baseline->parsed())
        {
            const auto kind = parse_baseline_kind(kind_name);
            const fs::path target = pred_out.empty()
                                        ? root / "predictions" / (kind_name + "_" + to_string(side) + ".apsl")
                                        : fs::path(pred_out);
            write_baseline(kind, manifest, side, target, jobs);
            out << "baseline: wrote " << target.string() << '\n';
        }
        else if (evaluate->parsed())
        {
            auto report = evaluate_run(manifest, pred_file, side, jobs);
            const auto j = report_to_json(report);
            const fs::path target = report_file.empty()
                                        ? root / "reports" /
                                              (fs::path(pred_file).stem().string() + "_" + to_string(side) + ".json")
                                        : fs::path(report_file);
            write_json_file(j, target);
            if (!ccdf_file.empty())
                write_ccdf_csv(ple_ccdf(report.ple_values, default_ccdf_thresholds()), ccdf_file);
            if (print_json)
                out << j.dump(2) << '\n';
            else
                out << "evaluate: " << report.n_samples << " samples, cossim=" << format_double(report.cossim)
                    << ", ple=" << format_double(report.ple_deg) << " deg, report " << target.string() << '\n';
        }
        else if (bench->parsed())
        {
            const auto predictor = condition_predictor(parse_baseline_kind(bench_kind), manifest.params);
            const auto samples = bench_samples(manifest, side, static_cast<std::size_t>(bench_n));
            const double ms = measure_latency(predictor, samples);
            nlohmann::json j{{"pred_kind", bench_kind}, {"samples", samples.size()}, {"latency_ms_per_sample", ms}};
            out << j.dump(2) << '\n';
        }
        return k_exit_ok;
    }
    catch (const Error &e)
    {
        err << "apsbench: " << e.what() << '\n';
        return k_exit_failure;
    }
    catch (const std::exception &e)
    {
        err << "apsbench: unexpected: " << e.what() << '\n';
        return k_exit_failure;
    }
}

} // namespace apsbench
