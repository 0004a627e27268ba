#ifndef RECOURSE_CLI_HPP
#define RECOURSE_CLI_HPP

#include <iosfwd>

namespace recourse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSearchFailed = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `recourse` tool: train | generate | evaluate | benchmark | plot.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace recourse

#endif  // RECOURSE_CLI_HPP
