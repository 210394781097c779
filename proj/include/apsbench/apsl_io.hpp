// SPDX-License-Identifier: Apache-2.0
//
// APSL spectrum files, shared by labels and predictions. Little-endian:
//   "APSL" | u16 version = 1 | u8 domain | u16 bins = 180 | u64 count |
//   count x 180 float32, row-major.

#ifndef APSBENCH_APSL_IO_HPP
#define APSBENCH_APSL_IO_HPP

#include "apsbench/apslabel.hpp"

#include <filesystem>
#include <vector>

namespace apsbench
{

inline constexpr std::uint16_t k_apsl_version = 1;
inline constexpr std::size_t k_apsl_header_bytes = 17;

struct ApslHeader
{
    Domain domain = Domain::normalized_linear;
    std::uint64_t count = 0;
};

// Rows must share one domain; an empty span writes a zero-count file in `domain`.
void write_apsl(const std::filesystem::path &path, std::span<const ApsSpectrum> rows,
                Domain domain = Domain::normalized_linear);

ApslHeader read_apsl_header(const std::filesystem::path &path);

// Values are widened from float32.
std::vector<ApsSpectrum> read_apsl(const std::filesystem::path &path);

} // namespace apsbench

#endif
