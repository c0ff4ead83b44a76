#ifndef PATCHCRF_CLI_HPP
#define PATCHCRF_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace patchcrf {

// Runs one CLI invocation (argv without the program name). Success writes
// machine-readable output only to the requested destination; every failure
// exits nonzero with a single diagnostic line on err. Log verbosity comes
// from the PATCHCRF_LOG environment variable (quiet|info|debug).
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

} // namespace patchcrf

#endif
