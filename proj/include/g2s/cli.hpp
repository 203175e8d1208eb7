#pragma once

#include <ostream>

namespace g2s {

// Entry point for the g2s tool: preprocess, stats, train, generate, eval,
// gradcheck. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace g2s
