// SPDX-License-Identifier: Apache-2.0

#include "apsbench/apsl_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace apsbench
{

namespace
{

template <typename T>
void put_le(std::vector<unsigned char> &buf, T v)
{
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xffu));
}

template <typename T>
T get_le(const unsigned char *p)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
}

ApslHeader parse_header(std::istream &is, const std::filesystem::path &path)
{
    unsigned char h[k_apsl_header_bytes];
    is.read(reinterpret_cast<char *>(h), sizeof(h));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(h)))
        throw Error("io", "truncated APSL header in " + path.string());
    if (std::memcmp(h, "APSL", 4) != 0)
        throw Error("io", "bad APSL magic in " + path.string());
    if (get_le<std::uint16_t>(h + 4) != k_apsl_version)
        throw Error("io", "unsupported APSL version in " + path.string());
    const std::uint8_t domain = h[6];
    if (domain > 2)
        throw Error("io", "unknown APSL domain code in " + path.string());
    if (get_le<std::uint16_t>(h + 7) != k_aps_bins)
        throw Error("io", "APSL bin count is not 180 in " + path.string());
    return {static_cast<Domain>(domain), get_le<std::uint64_t>(h + 9)};
}

} // namespace

void write_apsl(const std::filesystem::path &path, std::span<const ApsSpectrum> rows, Domain domain)
{
    if (!rows.empty())
        domain = rows.front().domain;
    std::vector<unsigned char> buf;
    buf.reserve(k_apsl_header_bytes + rows.size() * k_aps_bins * 4);
    buf.insert(buf.end(), {'A', 'P', 'S', 'L'});
    put_le<std::uint16_t>(buf, k_apsl_version);
    buf.push_back(static_cast<unsigned char>(domain));
    put_le<std::uint16_t>(buf, k_aps_bins);
    put_le<std::uint64_t>(buf, rows.size());
    for (const auto &row : rows)
    {
        if (row.domain != domain)
            throw Error("io", "mixed spectrum domains in one APSL file");
        for (const double v : row.bins)
            put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("io", "cannot write " + path.string());
    os.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

ApslHeader read_apsl_header(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("io", "cannot read APSL file " + path.string());
    return parse_header(is, path);
}

std::vector<ApsSpectrum> read_apsl(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("io", "cannot read APSL file " + path.string());
    const ApslHeader header = parse_header(is, path);

    const std::size_t payload = header.count * k_aps_bins * 4;
    std::vector<unsigned char> data(payload);
    is.read(reinterpret_cast<char *>(data.data()), static_cast<std::streamsize>(payload));
    if (static_cast<std::size_t>(is.gcount()) != payload || is.peek() != std::char_traits<char>::eof())
        throw Error("io", "APSL payload size does not match header count in " + path.string());

    std::vector<ApsSpectrum> rows(header.count);
    const unsigned char *p = data.data();
    for (auto &row : rows)
    {
        row.domain = header.domain;
        for (auto &v : row.bins)
        {
            v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)));
            p += 4;
        }
    }
    return rows;
}

} // namespace apsbench
