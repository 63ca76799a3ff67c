#pragma once

#include <iosfwd>

namespace gedkit {

// Quick gradient-check and oracle-equivalence suites; prints one line per
// check. Returns true when everything passes.
bool run_selftest(std::ostream& out);

}  // namespace gedkit
