// SPDX-License-Identifier: MIT
// SPDX-FileCopyrightText: Copyright 2026 siamese-nas contributors

#include <snas/cli.hpp>

int main(int argc, char** argv)
{
    return snas::cli::run(argc, argv);
}
