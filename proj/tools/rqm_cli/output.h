// Copyright 2026 The RQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and manifest helpers shared by the subcommands.

#ifndef RQM_TOOLS_RQM_CLI_OUTPUT_H_
#define RQM_TOOLS_RQM_CLI_OUTPUT_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rqm::cli {

// Bumped whenever a column is added, removed or reordered.
inline constexpr int kFormatVersion = 1;

struct CsvTable {
  // Written as "# " lines above the header.
  std::vector<std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest decimal string that round-trips, "inf" for infinity.
std::string FormatDouble(double v);

void WriteCsv(const CsvTable& table, std::ostream& out);

// Throws ValidationError if the file cannot be written.
void WriteFile(const std::filesystem::path& path, std::string_view content);
void WriteCsvFile(const CsvTable& table, const std::filesystem::path& path);

// Hex SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string GitBlobSha1(std::string_view content);

}  // namespace rqm::cli

#endif  // RQM_TOOLS_RQM_CLI_OUTPUT_H_
