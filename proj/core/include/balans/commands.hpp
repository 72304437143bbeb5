#ifndef BALANS_COMMANDS_HPP
#define BALANS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace balans {

// Exit-code contract shared by all commands:
//   0  success (and, for audit-style commands, zero violations)
//   2  config/usage error: unreadable or malformed config, mismatched pair,
//      non-nested refinement list
//   3  the run produced a non-finite value
//   4  filesystem error while writing outputs
//   5  an audited inequality was violated
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBlowup = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitViolation = 5;

int cmd_solve(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_audit(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_convergence(const std::string& config_path, const std::vector<int>& cell_counts,
                    std::ostream& out, std::ostream& err);
int cmd_stability(const std::string& config_path1, const std::string& config_path2,
                  std::ostream& out, std::ostream& err);
int cmd_data_dependence(const std::string& config_path, const std::string& perturbed_path,
                        std::ostream& out, std::ostream& err);

/// Output directory resolution: the BALANS_OUT environment variable
/// overrides the config's out_dir.
std::string resolve_out_dir(const std::string& configured);

} // namespace balans

#endif
