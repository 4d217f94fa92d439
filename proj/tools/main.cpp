// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/cli.hpp"

int main(int argc, char** argv) { return splatwatt::run_cli(argc, argv); }
