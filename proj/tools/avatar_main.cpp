// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return avatar::app::run_cli(argc, argv, std::cout, std::cerr); }
