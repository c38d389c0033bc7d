#pragma once

#include <stdexcept>

namespace dyadisc {

// A guard against runs whose exact-enumeration cost exceeds the documented
// size limits. Distinct from std::invalid_argument (malformed input) so the
// CLI can map it to its own exit code.
struct feasibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dyadisc
