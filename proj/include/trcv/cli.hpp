#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trcv/crossval.hpp"
#include "trcv/error.hpp"
#include "trcv/regularization.hpp"

namespace trcv::cli {

enum class RuleChoice { min, one_se, chi2 };

struct RunConfig {
  std::filesystem::path x_path;
  std::filesystem::path y_path;
  std::optional<std::filesystem::path> segments_path;
  RegularizationSpec reg;
  double lambda_min{0.0};
  double lambda_max{0.0};
  Index lambda_count{1000};
  bool linear_grid{false};
  bool allow_zero_lambda{false};
  CvStrategy strategy{CvStrategy::loocv};
  std::vector<RuleChoice> rules{RuleChoice::min};
  double alpha{0.2};
  std::filesystem::path out_dir;
  unsigned threads{1};
  std::uint64_t seed{kDefaultSeed};
};

// Exit status per error category: 2 input, 3 numeric, 4 configuration.
int exit_code(ErrorKind kind);

// Throws ErrorKind::config for inconsistent settings.
void validate(const RunConfig& config);

// Runs the full pipeline and writes curve.csv, selection.json,
// coefficients.csv and residuals.csv into config.out_dir. Errors are
// reported on `err` and mapped to an exit status.
int run(const RunConfig& config, std::ostream& err);

// Parses flags and runs; the entry point of the trcv executable.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace trcv::cli
