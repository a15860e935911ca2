/**
 * Copyright 2026 The vcrobust Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VCROBUST_CLI_HPP
#define VCROBUST_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vcrobust::cli {

/// Seed used by every deterministic subcommand when --seed is omitted.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kIo = 3 };

/// Runs the command line in-process. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vcrobust::cli

#endif  // VCROBUST_CLI_HPP
