// SPDX-License-Identifier: Apache-2.0

#ifndef APSBENCH_COMMON_HPP
#define APSBENCH_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace apsbench
{

// Every failure carries the pipeline stage it came from, so the CLI can name it.
class Error : public std::runtime_error
{
public:
    Error(std::string stage, const std::string &what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string &stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct Point
{
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point &, const Point &) = default;
};

// Portable seeded generator. std::uniform_*_distribution differ between standard
// libraries, so variates are derived from the raw 64-bit stream here.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Runs body(i) for i in [0, n) on up to `jobs` threads. Callers write results
// into pre-sized, index-addressed slots so output order never depends on jobs.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)> &body);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace apsbench

#endif
