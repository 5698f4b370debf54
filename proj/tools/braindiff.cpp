// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "braindiff/cli/cli.hpp"

int main(int argc, char** argv) {
  return bd::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
