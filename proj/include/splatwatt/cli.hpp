// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace splatwatt {

// Exit codes: 0 success, 2 config/usage, 3 compute, 4 I/O.
int run_cli(int argc, const char* const* argv);

}  // namespace splatwatt
