#pragma once

#include <filesystem>
#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome gp_numerics();
Outcome grid_oracle();
Outcome dense_scan();
Outcome safety();
Outcome pairing();
Outcome timing();
Outcome off_grid();
Outcome initialization();
Outcome trace_metrics();
Outcome determinism();

/// Configuration shipped with the repository.
std::filesystem::path config_file(const std::string& name);

/// Fresh scratch directory under the system temp directory.
std::filesystem::path scratch(const std::string& name);

}  // namespace acceptance
