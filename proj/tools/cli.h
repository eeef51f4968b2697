/*
 * Copyright 2026 The LMM Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LMM_TOOLS_CLI_H_
#define LMM_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace lmm::cli {

inline constexpr char kToolVersion[] = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

// argv without the program name, e.g. {"train", "--clicks", "log.tsv", ...}.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmm::cli

#endif  // LMM_TOOLS_CLI_H_
