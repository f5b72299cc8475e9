// ============================================================================
// ddc/config.hpp - run configuration
//
// A configuration is a flat UTF-8 text document of `key = value` lines;
// `#` starts a comment, blank lines are ignored. Keys:
//
//   problem          manufactured | step_channel            (required)
//   predictor        av | sav                               (required)
//   levels           comma-separated 1/h values, e.g. 4,8,16 (required)
//   nu               viscosity (0.1 manufactured, 1/600 step channel)
//   dt_rule          half_h | fixed                         (half_h)
//   dt_fixed         time step for dt_rule = fixed
//   av_rule          equals_dt | fixed                      (equals_dt)
//   av_fixed         artificial viscosity for av_rule = fixed
//   T                final time (1 manufactured, 40 step channel)
//   picard_tol       relative Picard update tolerance       (1e-9)
//   picard_max       Picard iteration cap                   (50)
//   solver_tol       relative saddle-solve residual         (1e-10)
//   defect_term_form gradient_gradient | literal            (gradient_gradient)
//   output_dir       directory for all outputs              (ddc_output)
//   snapshot_every   VTK snapshot period in steps, 0 = final only (0)
//   steady_tol       steady-state detector threshold        (1e-6)
// ============================================================================
#pragma once

#include "ddc/mesh.hpp"
#include "ddc/problems.hpp"
#include "ddc/schemes.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ddc {

enum class ProblemKind { Manufactured, StepChannel };
enum class DtRule { HalfH, Fixed };
enum class AvRule { EqualsDt, Fixed };

struct RunConfig {
  ProblemKind problem = ProblemKind::Manufactured;
  PredictorKind predictor = PredictorKind::SAV;
  double nu = 0.1;
  std::vector<int> levels;
  DtRule dt_rule = DtRule::HalfH;
  double dt_fixed = 0.0;
  AvRule av_rule = AvRule::EqualsDt;
  double av_fixed = 0.0;
  double T = 1.0;
  double picard_tol = 1e-9;
  int picard_max = 50;
  double solver_tol = 1e-10;
  DefectTermForm defect_form = DefectTermForm::GradientGradient;
  std::string output_dir = "ddc_output";
  int snapshot_every = 0;
  double steady_tol = 1e-6;

  std::string source;  // configuration text as read, echoed into reports
};

/// Throws ConfigError with the offending line on any problem.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Nominal mesh size 1/level.
double nominal_h(int level);
SchemeParams scheme_params(const RunConfig& config, int level);
std::shared_ptr<const Mesh> build_mesh(const RunConfig& config, int level);
std::unique_ptr<FlowProblem> make_problem(const RunConfig& config);

std::string_view to_string(PredictorKind kind);
std::string_view to_string(ProblemKind kind);

} // namespace ddc
