// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "fntdsp/cli.hpp"

int main(int argc, char** argv) { return fntdsp::cli::run(argc, argv, std::cout, std::cerr); }
