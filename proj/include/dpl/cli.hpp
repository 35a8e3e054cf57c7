#pragma once

#include <iosfwd>

namespace dpl {

// Exit codes of the dpl tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;     // rejected configuration or data
inline constexpr int kExitInternal = 2;  // solver or invariant failure

/// `dpl run|cascade|check|presets ...`; diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace dpl
