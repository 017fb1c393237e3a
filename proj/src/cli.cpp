#include "trcv/cli.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "trcv/io.hpp"
#include "trcv/model.hpp"
#include "trcv/select.hpp"

namespace trcv::cli {

namespace {

struct Selection {
  SelectionResult result;
  Index response;
  std::optional<double> alpha;
};

std::string column_name(const Selection& s) {
  return std::string{to_string(s.result.rule)} + "_r" +
         std::to_string(s.response + 1);
}

LambdaGrid make_grid(const RunConfig& c) {
  if (c.linear_grid) {
    return LambdaGrid::linear(c.lambda_min, c.lambda_max, c.lambda_count,
                              c.allow_zero_lambda);
  }
  return LambdaGrid::log_spaced(c.lambda_min, c.lambda_max, c.lambda_count);
}

void write_curve(const std::filesystem::path& path, const CvCurve& curve,
                 const Matrix& gcv, const Vector& df) {
  const Index q{curve.q()};
  std::vector<std::string> header{"lambda"};
  for (Index j = 0; j < q; ++j) header.push_back("press_r" + std::to_string(j + 1));
  for (Index j = 0; j < q; ++j) header.push_back("gcv_r" + std::to_string(j + 1));
  header.push_back("df");

  Matrix table(curve.grid.size(), 2 * q + 2);
  for (Index k = 0; k < curve.grid.size(); ++k) {
    table(k, 0) = curve.grid[k];
  }
  table.middleCols(1, q) = curve.press;
  table.middleCols(1 + q, q) = gcv;
  table.col(2 * q + 1) = df;
  io::write_matrix_csv(path, table, header);
}

void write_selection_json(const std::filesystem::path& path,
                          const std::vector<Selection>& selections) {
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw Error{ErrorKind::input, "cannot write " + path.string()};
  }
  out << "[\n";
  for (std::size_t i = 0; i < selections.size(); ++i) {
    const Selection& s{selections[i]};
    out << "  {\"rule\": \"" << to_string(s.result.rule) << "\", "
        << "\"response\": " << s.response + 1 << ", "
        << "\"alpha\": " << (s.alpha ? io::format_double(*s.alpha) : "null")
        << ", "
        << "\"lambda\": " << io::format_double(s.result.lambda) << ", "
        << "\"index\": " << s.result.index << ", "
        << "\"criterion_value\": " << io::format_double(s.result.criterion)
        << "}" << (i + 1 < selections.size() ? "," : "") << "\n";
  }
  out << "]\n";
}

void write_coefficients(const std::filesystem::path& path,
                        const ModelFamily& family,
                        const std::vector<Selection>& selections) {
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw Error{ErrorKind::input, "cannot write " + path.string()};
  }
  const Index p{family.basis().p()};
  Matrix table(p + 1, static_cast<Index>(selections.size()));
  out << "term";
  for (std::size_t i = 0; i < selections.size(); ++i) {
    const Selection& s{selections[i]};
    const Coefficients c{coefficients_at(family, s.result.index)};
    table(0, static_cast<Index>(i)) = c.intercept(s.response);
    table.col(static_cast<Index>(i)).tail(p) = c.b.col(s.response);
    out << "," << column_name(s);
  }
  out << "\n";
  for (Index r = 0; r <= p; ++r) {
    out << (r == 0 ? std::string{"intercept"} : "x" + std::to_string(r));
    for (Index i = 0; i < table.cols(); ++i) {
      out << "," << io::format_double(table(r, i));
    }
    out << "\n";
  }
}

void write_residuals(const std::filesystem::path& path, const CvCurve& curve,
                     const std::vector<Selection>& selections) {
  Matrix table(curve.n(), static_cast<Index>(selections.size()));
  std::vector<std::string> header;
  for (std::size_t i = 0; i < selections.size(); ++i) {
    const Selection& s{selections[i]};
    table.col(static_cast<Index>(i)) =
        curve.cv_residuals[static_cast<std::size_t>(s.response)].col(s.result.index);
    header.push_back(column_name(s));
  }
  io::write_matrix_csv(path, table, header);
}

bool needs_segments(CvStrategy s) {
  return s == CvStrategy::segcv_implicit || s == CvStrategy::segcv_explicit ||
         s == CvStrategy::vircv;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
    case ErrorKind::dimension:
      return 2;
    case ErrorKind::numeric:
    case ErrorKind::singular:
    case ErrorKind::rank:
      return 3;
    case ErrorKind::config:
    case ErrorKind::contract:
      return 4;
  }
  return 1;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error{ErrorKind::config, msg}; };
  if (!(c.lambda_min < c.lambda_max)) fail("--lambda-min must be below --lambda-max");
  if (c.lambda_count < 2) fail("--lambda-count must be at least 2");
  if (c.lambda_min < 0.0) fail("--lambda-min must be non-negative");
  if (c.lambda_min == 0.0 && !(c.linear_grid && c.allow_zero_lambda)) {
    fail("lambda = 0 needs --linear-grid and --allow-zero-lambda");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("--alpha must lie in (0, 1)");
  if (!(c.reg.epsilon > 0.0)) fail("--epsilon must be positive");
  if (c.rules.empty()) fail("at least one selection rule is required");
  if (needs_segments(c.strategy) && !c.segments_path) {
    fail("strategy " + std::string{to_string(c.strategy)} +
         " requires --segments");
  }
  if (c.out_dir.empty()) fail("--out is required");
}

int run(const RunConfig& config, std::ostream& err) {
  try {
    validate(config);

    std::vector<std::string> warnings;
    const Dataset data{io::load_dataset(
        {config.x_path, config.y_path, config.segments_path}, &warnings)};
    for (const auto& w : warnings) {
      err << "warning: " << w << "\n";
    }

    const LambdaGrid grid{make_grid(config)};
    const ModelFamily family{make_basis(data, config.reg), grid};
    const CvCurve gcv{gcv_curve(family)};

    const CvCurve curve{[&] {
      switch (config.strategy) {
        case CvStrategy::loocv: return loocv_press(family);
        case CvStrategy::gcv: return gcv;
        case CvStrategy::segcv_implicit:
          return segcv_press_implicit(family, data, config.threads);
        case CvStrategy::segcv_explicit:
          return segcv_press_explicit(data, config.reg, grid);
        case CvStrategy::vircv: return vircv_press(data, config.reg, grid, config.seed);
      }
      throw Error{ErrorKind::config, "unknown strategy"};
    }()};

    std::vector<Selection> selections;
    for (Index j = 0; j < data.q(); ++j) {
      for (RuleChoice rule : config.rules) {
        switch (rule) {
          case RuleChoice::min:
            selections.push_back({grid_minimum(curve, j), j, std::nullopt});
            break;
          case RuleChoice::one_se:
            selections.push_back({one_se_rule(curve, j), j, std::nullopt});
            break;
          case RuleChoice::chi2:
            selections.push_back(
                {chi_square_rule(curve, j, config.alpha), j, config.alpha});
            break;
        }
      }
    }

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) {
      throw Error{ErrorKind::input,
                  "cannot create output directory " + config.out_dir.string()};
    }
    write_curve(config.out_dir / "curve.csv", curve, *gcv.gcv, family.df());
    write_selection_json(config.out_dir / "selection.json", selections);
    write_coefficients(config.out_dir / "coefficients.csv", family, selections);
    write_residuals(config.out_dir / "residuals.csv", curve, selections);
    return 0;
  } catch (const Error& e) {
    err << "trcv: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "trcv: " << e.what() << "\n";
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Ridge/Tikhonov regression with fast cross-validated PRESS and GCV"};
  RunConfig config;

  std::string x_path;
  std::string y_path;
  std::string segments_path;
  std::string out_dir;
  app.add_option("--x", x_path, "Predictor CSV (n x p)")->required();
  app.add_option("--y", y_path, "Response CSV (n x q)")->required();
  app.add_option("--segments", segments_path, "Segment label file, one per row");

  const std::map<std::string, RegularizationKind> reg_map{
      {"identity", RegularizationKind::identity},
      {"std", RegularizationKind::standardize},
      {"d1", RegularizationKind::derivative1},
      {"d2", RegularizationKind::derivative2}};
  std::string reg_name;
  app.add_option("--reg", reg_name, "Regularisation matrix: identity, std, d1, d2")
      ->required()
      ->check(CLI::IsMember(reg_map));
  app.add_option("--epsilon", config.reg.epsilon,
                 "Scaling of the Legendre rows for d1/d2");
  app.add_option("--lambda-min", config.lambda_min)->required();
  app.add_option("--lambda-max", config.lambda_max)->required();
  app.add_option("--lambda-count", config.lambda_count);
  app.add_flag("--linear-grid", config.linear_grid, "Linear instead of log spacing");
  app.add_flag("--allow-zero-lambda", config.allow_zero_lambda,
               "Permit lambda = 0 as the first linear grid point");

  const std::map<std::string, CvStrategy> strategy_map{
      {"loocv", CvStrategy::loocv},
      {"gcv", CvStrategy::gcv},
      {"segcv", CvStrategy::segcv_implicit},
      {"vircv", CvStrategy::vircv},
      {"segcv-explicit", CvStrategy::segcv_explicit}};
  std::string strategy_name;
  app.add_option("--strategy", strategy_name,
                 "Cross-validation strategy: loocv, gcv, segcv, vircv, "
                 "segcv-explicit")
      ->required()
      ->check(CLI::IsMember(strategy_map));

  const std::map<std::string, RuleChoice> rule_map{
      {"min", RuleChoice::min},
      {"one-se", RuleChoice::one_se},
      {"chi2", RuleChoice::chi2}};
  std::vector<std::string> rule_names{"min"};
  app.add_option("--rules", rule_names, "Selection rules: min,one-se,chi2")
      ->delimiter(',')
      ->check(CLI::IsMember(rule_map));
  app.add_option("--alpha", config.alpha, "Significance level of the chi2 rule");
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--threads", config.threads, "Worker threads for segmented CV");
  app.add_option("--seed", config.seed, "Seed for VirCV basis completion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_code(ErrorKind::config);
  }

  config.reg.kind = reg_map.at(reg_name);
  config.strategy = strategy_map.at(strategy_name);
  config.rules.clear();
  for (const auto& name : rule_names) {
    config.rules.push_back(rule_map.at(name));
  }
  config.x_path = x_path;
  config.y_path = y_path;
  if (!segments_path.empty()) config.segments_path = segments_path;
  config.out_dir = out_dir;
  return run(config, err);
}

}  // namespace trcv::cli
