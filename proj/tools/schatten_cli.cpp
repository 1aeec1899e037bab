// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "schatten/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return schatten::cli::run(args, std::cout, std::cerr);
}
