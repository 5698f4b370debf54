// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The braindiff command line: synth-data, train, generate, evaluate, analyze
// and export. run_cli takes the arguments after the program name.

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace bd {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kArgument = 2;
inline constexpr int kIo = 3;
inline constexpr int kValidation = 4;  // corrupt or invalid inputs
}  // namespace exit_code

/// Maps an exception from the library to its exit status.
int exit_code_for(const std::exception& e);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bd
