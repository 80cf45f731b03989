// Copyright 2026 The TinyCo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. The binary's main() forwards here; tests call
// RunCli directly with captured streams.

#ifndef TINYCO_CLI_H_
#define TINYCO_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace tinyco {

// `args` excludes the program name. Returns the process exit status: 0 on
// success, 1 on a pipeline error (reported as JSON on `err`), 2 on bad
// usage.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

int RunCli(int argc, char** argv);

}  // namespace tinyco

#endif  // TINYCO_CLI_H_
