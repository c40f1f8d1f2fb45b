#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "capfield/equilibrium.hpp"
#include "capfield/fields.hpp"

namespace capfield::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckMismatch = 1,
  kValidation = 2,
  kNonconvergence = 3,
};

/// Writes `phi,f,Q,U,weighted_potential` rows at the profile's grid nodes,
/// 17 significant digits, LF line endings. Throws std::runtime_error naming
/// the path when the file cannot be written.
void emit_density_table(const DensityProfile& profile,
                        const ExternalField& field,
                        const std::filesystem::path& path);

/// Parses args (args[0] is the program name) and runs one command. The JSON
/// summary goes to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace capfield::cli
