// SPDX-License-Identifier: Apache-2.0

#ifndef APSBENCH_CLI_HPP
#define APSBENCH_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace apsbench
{

// Exit codes returned by run().
inline constexpr int k_exit_ok = 0;
inline constexpr int k_exit_failure = 1; // a pipeline stage failed
inline constexpr int k_exit_usage = 2;   // bad flags or arguments

// Entry point of the `apsbench` tool. args excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Parses id lists such as "0-3,5".
std::vector<int> parse_id_list(const std::string &text);

} // namespace apsbench

#endif
