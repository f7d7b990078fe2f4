#pragma once

#include <ostream>

namespace sigscore::cli {

/// Quick agreement checks between independent computations; prints one line
/// per check and returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace sigscore::cli
