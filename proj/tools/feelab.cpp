// Copyright 2026 The feelab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <feelab/commands.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return feelab::cli::run(argc, argv, std::cout, std::cerr);
}
