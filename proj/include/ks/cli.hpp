#ifndef KS_CLI_HPP
#define KS_CLI_HPP

#include <string>
#include <vector>

namespace ks::cli {

/// Entry point behind main(). Exit codes: 0 success, 1 usage/config error,
/// 2 invariant or claim failure, 3 instability.
int run(const std::vector<std::string>& args);

} // namespace ks::cli

#endif
