// ============================================================================
// ddc/schemes.hpp - defect-deferred correction time stepping
//
// One time step consists of a stabilized backward-Euler predictor u1 and a
// correction step u2 that removes the artificial-viscosity defect and the
// first-order time error:
//
//   predictor (AV):  (u1' - u1)/k + (nu + av) grad-grad + b*(u1', u1', v) - (p1, div v)
//                      = (f(t+k), v)
//   predictor (SAV): same, plus av (G, grad v) on the right, where G is the
//                      P1 L2 projection of grad u1 from the previous level
//   corrector:       (u2' - u2)/k + (nu + av) grad-grad + b*(u2', u2', v) - (p2, div v)
//                      = ((f(t+k) + f(t))/2, v) + (nu/2) (grad(u1' - u1), grad v)
//                        + 1/2 b*(u1', u1', v) - 1/2 b*(u1, u1, v) + av (grad u1', grad v)
//
// All implicit convection terms are resolved by Picard iteration on the
// advecting velocity, which keeps the discrete convection operator skew.
// ============================================================================
#pragma once

#include "ddc/linsolve.hpp"
#include "ddc/operators.hpp"
#include "ddc/problems.hpp"
#include "ddc/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ddc {

enum class PredictorKind { AV, SAV };

/// How the viscous defect of the correction step is paired with the test
/// function: gradient against gradient (default), or the vector
/// ((grad w) (1,1)^T, v) obtained by reading the term without a test gradient.
enum class DefectTermForm { GradientGradient, Literal };

struct SchemeParams {
  double nu = 0.1;
  double k = 0.1;   // time step
  double T = 1.0;   // final time
  double av = 0.1;  // artificial viscosity magnitude
  double picard_tol = 1e-9;
  int picard_max = 50;
  double solver_tol = 1e-10;
  PredictorKind predictor = PredictorKind::SAV;
  DefectTermForm defect_form = DefectTermForm::GradientGradient;
  /// Precondition GMRES with factors of an earlier matrix instead of
  /// refactorizing every Picard iteration (same residual tolerance).
  bool reuse_factors = true;

  /// Number of steps T / k; throws std::invalid_argument unless the
  /// parameters are valid and T is an integer multiple of k.
  int steps() const;
  void validate() const;
};

struct PicardReport {
  int iterations = 0;
  double update_norm = 0.0;  // relative l2 change of the last iteration
  bool converged = false;
  double max_solver_residual = 0.0;
};

struct SchemeState {
  int n = 0;
  double t_n = 0.0;
  FieldVector u1_n, u1_np1, p1_np1;
  FieldVector u1_nm1;  // previous predictor level, empty before the first step
  std::optional<CoarseGradient> G_n;  // present iff the predictor is SAV
  FieldVector u2_n, u2_np1, p2_np1;
};

/// Spaces, constant operators and boundary bookkeeping for one mesh and problem.
class FlowDiscretization {
public:
  FlowDiscretization(std::shared_ptr<const Mesh> mesh, const FlowProblem& problem);

  const TaylorHoodSpace& space() const { return th_; }
  const FlowProblem& problem() const { return *problem_; }
  Index n_velocity() const { return th_.n_velocity(); }
  Index n_pressure() const { return th_.n_pressure(); }

  const SparseOperator& mass() const { return mass_; }            // vector P2 mass
  const SparseOperator& stiffness() const { return stiffness_; }  // vector P2 grad-grad
  const SparseOperator& divergence() const { return divergence_; }
  const FieldVector& mean_vector() const { return mean_; }
  /// Large-scale space L^H: continuous P1 on the same mesh.
  const ScalarSpace& large_scale_space() const { return th_.pressure; }
  const P1GradientProjection& projection() const;

  /// Component-blocked velocity dofs with strongly imposed data, sorted.
  const std::vector<Index>& dirichlet_dofs() const { return dirichlet_dofs_; }
  FieldVector dirichlet_values(double t) const;
  /// (f(t), v_i); zero when the problem has no forcing.
  FieldVector forcing_load(double t) const;

  /// Saddle system shell with this discretization's coupling, boundary data
  /// at time t and pressure constraint; A and f are left to the caller.
  SaddleSystem saddle_shell(double t) const;

private:
  const FlowProblem* problem_;
  TaylorHoodSpace th_;
  SparseOperator mass_, stiffness_, divergence_, coupling_;
  FieldVector mean_;
  std::vector<Index> dirichlet_dofs_;
  std::vector<BoundaryTag> dirichlet_tag_;  // per entry of dirichlet_dofs_
  mutable std::unique_ptr<P1GradientProjection> projection_;
};

struct StokesProjection {
  FieldVector u, p;
  SolverReport report;
};

/// Modified Stokes projection of an analytic pair (u0, p0):
///   viscosity (grad(u0 - u~), grad v) - (p0 - p~, div v) = 0,  (div(u0 - u~), q) = 0,
/// with the boundary values of u0 imposed at boundary dofs.
StokesProjection stokes_project_initial(const FlowDiscretization& disc, const VectorFunction& u0,
                                        const TensorFunction& grad_u0, const ScalarFunction& p0,
                                        double viscosity, double tol = 1e-10);

/// Same projection for a field known only through its P2 coefficients.
StokesProjection stokes_project_discrete(const FlowDiscretization& disc, const FieldVector& u0,
                                         double viscosity, double tol = 1e-10);

struct StepSolution {
  FieldVector u, p;
  std::optional<CoarseGradient> G;  // projection of the new predictor velocity (SAV)
  PicardReport report;
};

/// Stabilized backward-Euler predictor with artificial viscosity on all scales.
StepSolution predictor_step_av(const FlowDiscretization& disc, const SchemeState& state,
                               const SchemeParams& params, SaddleSolver& solver);

/// Subgrid predictor: the av-dissipation of the coarse gradient G_n is moved to
/// the right-hand side, so only scales unresolved by L^H are damped.
StepSolution predictor_step_sav(const FlowDiscretization& disc, const SchemeState& state,
                                const SchemeParams& params, const LargeScaleProjection& lspace,
                                SaddleSolver& solver);

/// Deferred correction step from u1_n, u1_np1 and u2_n.
StepSolution corrector_step(const FlowDiscretization& disc, const SchemeState& state,
                            const SchemeParams& params, SaddleSolver& solver);

struct StepRecord {
  const FlowDiscretization& disc;
  const SchemeParams& params;
  const SchemeState& state;  // u*_n hold the previous level, u*_np1 the new one
  const PicardReport& predictor;
  const PicardReport& corrector;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct RunSummary {
  int steps = 0;
  double t_final = 0.0;
  int predictor_iterations = 0;
  int corrector_iterations = 0;
  double seconds = 0.0;
};

/// Runs initialization and the predictor/corrector pair with an optional
/// large-scale projection override (nullptr selects the P1 projection).
class DdcIntegrator {
public:
  DdcIntegrator(const FlowDiscretization& disc, SchemeParams params,
                const LargeScaleProjection* lspace = nullptr);

  /// Stokes-projected initial state at t = 0 (and G_0 for SAV).
  void initialize();
  /// One predictor + corrector; observers see the state before the shift.
  void step(std::span<const StepObserver> observers = {});

  const SchemeState& state() const { return state_; }
  const SchemeParams& params() const { return params_; }
  const FlowDiscretization& discretization() const { return disc_; }
  const LargeScaleProjection& large_scale() const { return *lspace_; }

  int predictor_iterations() const { return predictor_iterations_; }
  int corrector_iterations() const { return corrector_iterations_; }

private:
  const FlowDiscretization& disc_;
  SchemeParams params_;
  const LargeScaleProjection* lspace_;
  SaddleSolver solver_;
  SchemeState state_;
  int predictor_iterations_ = 0;
  int corrector_iterations_ = 0;
};

/// Full run over n = 0 .. N-1; observers are called after every corrector.
RunSummary advance(const FlowDiscretization& disc, const SchemeParams& params,
                   std::span<const StepObserver> observers = {},
                   const LargeScaleProjection* lspace = nullptr);

} // namespace ddc
