// Copyright 2026 The mpkg Authors.
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

#pragma once

namespace mpkg {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitCheckpoint = 4,
  kExitGradCheck = 5,
};

/// Entry point of the `mpkg` tool: gen, pretrain, finetune, eval, infer and
/// gradcheck subcommands. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace mpkg
