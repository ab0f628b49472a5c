#ifndef SARW_TOOLS_CLI_HPP_
#define SARW_TOOLS_CLI_HPP_

#include <ostream>

namespace sarw::cli {

// Exit codes: 0 success, 1 pipeline error (message names the failing module), 2 bad usage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sarw::cli

#endif  // SARW_TOOLS_CLI_HPP_
