#pragma once

#include <ostream>

namespace incflow {

// Entry point of the incflow tool. Exit codes: 0 ok, 1 usage or parse error,
// 2 invariant violation or failed verification.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace incflow
