#ifndef CAUSAL_CLI_HPP
#define CAUSAL_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace causal {

// Command-line driver. `args` excludes the program name. Results go to
// `out` as JSON (or a plain table with --output table); diagnostics go to
// `err`. Returns 0 on success, 1 on user error, 2 on a broken internal
// invariant. Identical invocations produce byte-identical output.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace causal

#endif  // CAUSAL_CLI_HPP
