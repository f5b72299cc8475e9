// ============================================================================
// src/schemes.cpp - predictor, corrector, initialization and the time loop
// ============================================================================
#include "ddc/schemes.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ddc {

int SchemeParams::steps() const
{
  validate();
  const double ratio = T / k;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
    throw std::invalid_argument("SchemeParams: T must be an integer multiple of k");
  return static_cast<int>(n);
}

void SchemeParams::validate() const
{
  if (!(nu > 0.0))
    throw std::invalid_argument("SchemeParams: nu must be positive");
  if (!(k > 0.0))
    throw std::invalid_argument("SchemeParams: k must be positive");
  if (!(av >= 0.0))
    throw std::invalid_argument("SchemeParams: av must be non-negative");
  if (!(T >= k))
    throw std::invalid_argument("SchemeParams: T must be at least k");
  if (!(picard_tol > 0.0) || picard_max < 1)
    throw std::invalid_argument("SchemeParams: invalid Picard controls");
  if (!(solver_tol > 0.0))
    throw std::invalid_argument("SchemeParams: solver tolerance must be positive");
}

// ---------------------------------------------------------------------------
// FlowDiscretization
// ---------------------------------------------------------------------------

FlowDiscretization::FlowDiscretization(std::shared_ptr<const Mesh> mesh, const FlowProblem& problem)
    : problem_(&problem), th_(std::move(mesh))
{
  const SparseOperator m = assemble_mass(th_.velocity);
  const SparseOperator s = assemble_stiffness(th_.velocity);
  mass_ = vector_block(m);
  stiffness_ = vector_block(s);
  divergence_ = assemble_divergence(th_);
  mean_ = assemble_mean_vector(th_.pressure);

  const Index n = th_.velocity.n_dofs();
  std::vector<int> tag_of(n, -1);
  for (BoundaryTag tag : problem.dirichlet_tags())
    for (Index d : th_.velocity.boundary_dofs(tag))
      tag_of[d] = static_cast<int>(tag);
  for (int c = 0; c < 2; ++c)
    for (Index d = 0; d < n; ++d)
      if (tag_of[d] >= 0) {
        dirichlet_dofs_.push_back(c * n + d);
        dirichlet_tag_.push_back(static_cast<BoundaryTag>(tag_of[d]));
      }
}

const P1GradientProjection& FlowDiscretization::projection() const
{
  if (!projection_)
    projection_ = std::make_unique<P1GradientProjection>(th_.velocity, th_.pressure);
  return *projection_;
}

FieldVector FlowDiscretization::dirichlet_values(double t) const
{
  const Index n = th_.velocity.n_dofs();
  const auto& coords = th_.velocity.dof_coordinates();
  FieldVector values(static_cast<Index>(dirichlet_dofs_.size()));
  for (std::size_t i = 0; i < dirichlet_dofs_.size(); ++i) {
    const Index dof = dirichlet_dofs_[i];
    const int c = dof < n ? 0 : 1;
    const Vec2 v = problem_->boundary_velocity(dirichlet_tag_[i], coords[dof - c * n], t);
    values[static_cast<Index>(i)] = v[c];
  }
  return values;
}

FieldVector FlowDiscretization::forcing_load(double t) const
{
  if (!problem_->has_forcing())
    return FieldVector::Zero(n_velocity());
  const FlowProblem* p = problem_;
  return assemble_load(th_.velocity, [p](const Point& x, double s) { return p->forcing(x, s); }, t);
}

SaddleSystem FlowDiscretization::saddle_shell(double t) const
{
  SaddleSystem sys;
  sys.B = -divergence_;
  sys.g = FieldVector::Zero(n_pressure());
  sys.dirichlet_dofs = dirichlet_dofs_;
  sys.dirichlet_values = dirichlet_values(t);
  if (problem_->zero_mean_pressure())
    sys.mean_constraint = mean_;
  return sys;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

StokesProjection solve_projection(const FlowDiscretization& disc, FieldVector f, FieldVector g,
                                  FieldVector boundary, double viscosity, double tol)
{
  if (!(viscosity > 0.0))
    throw std::invalid_argument("stokes projection: viscosity must be positive");
  SaddleSystem sys = disc.saddle_shell(0.0);
  sys.A = viscosity * disc.stiffness();
  sys.f = std::move(f);
  sys.g = std::move(g);
  sys.dirichlet_values = std::move(boundary);
  SaddleSolver solver;
  SaddleSolution sol = solver.solve(sys, tol);
  return {std::move(sol.u), std::move(sol.p), sol.report};
}

} // namespace

StokesProjection stokes_project_initial(const FlowDiscretization& disc, const VectorFunction& u0,
                                        const TensorFunction& grad_u0, const ScalarFunction& p0,
                                        double viscosity, double tol)
{
  const TaylorHoodSpace& th = disc.space();
  // viscosity (grad u0, grad v) - (p0, div v)
  FieldVector f = viscosity * assemble_gradient_load(th.velocity, grad_u0);
  if (p0)
    f -= assemble_pressure_load(th.velocity, p0);
  // B = -D, so B u~ = -(div u0, q).
  FieldVector g = -assemble_divergence_load(th.pressure, grad_u0);

  const FieldVector full = interpolate(u0, th.velocity);
  FieldVector boundary(static_cast<Index>(disc.dirichlet_dofs().size()));
  for (std::size_t i = 0; i < disc.dirichlet_dofs().size(); ++i)
    boundary[static_cast<Index>(i)] = full[disc.dirichlet_dofs()[i]];
  return solve_projection(disc, std::move(f), std::move(g), std::move(boundary), viscosity, tol);
}

StokesProjection stokes_project_discrete(const FlowDiscretization& disc, const FieldVector& u0,
                                         double viscosity, double tol)
{
  if (u0.size() != disc.n_velocity())
    throw std::invalid_argument("stokes_project_discrete: velocity vector has wrong length");
  FieldVector f = viscosity * (disc.stiffness() * u0);
  FieldVector g = -(disc.divergence() * u0);
  FieldVector boundary(static_cast<Index>(disc.dirichlet_dofs().size()));
  for (std::size_t i = 0; i < disc.dirichlet_dofs().size(); ++i)
    boundary[static_cast<Index>(i)] = u0[disc.dirichlet_dofs()[i]];
  return solve_projection(disc, std::move(f), std::move(g), std::move(boundary), viscosity, tol);
}

// ---------------------------------------------------------------------------
// Picard-linearized implicit solves
// ---------------------------------------------------------------------------

namespace {

constexpr double kLooseLinearTol = 1e-6;

// Solves (A_fixed + N(w)) u - D^T p = rhs, D u = 0 with w <- u until the
// relative update drops below picard_tol.
StepSolution picard_solve(const FlowDiscretization& disc, const SchemeParams& params,
                          const SparseOperator& fixed, const FieldVector& rhs, double t_new,
                          const FieldVector& guess, SaddleSolver& solver, const char* what)
{
  SaddleSystem sys = disc.saddle_shell(t_new);
  sys.f = rhs;
  const ScalarSpace& velocity = disc.space().velocity;

  StepSolution out;
  FieldVector w = guess;
  // Early iterates only need a linear residual small against the current
  // Picard update; convergence is accepted only from a fully resolved solve.
  double linear_tol = std::max(params.solver_tol, kLooseLinearTol);
  for (int it = 1; it <= params.picard_max; ++it) {
    sys.A = fixed + assemble_convection_linearized(velocity, w);
    SaddleSolution sol = solver.solve(sys, linear_tol);
    const double unorm = sol.u.norm();
    const double change = (sol.u - w).norm();
    const double update = unorm > 0.0 ? change / unorm : change;
    out.report.iterations = it;
    out.report.update_norm = update;
    const bool tight = linear_tol <= params.solver_tol;
    if (tight)
      out.report.max_solver_residual = std::max(out.report.max_solver_residual, sol.report.residual);
    w = std::move(sol.u);
    out.p = std::move(sol.p);
    if (tight && update <= params.picard_tol) {
      out.report.converged = true;
      out.u = std::move(w);
      return out;
    }
    linear_tol = std::max(params.solver_tol, std::min(kLooseLinearTol, 1e-3 * update));
  }
  std::ostringstream msg;
  msg << what << ": Picard iteration did not converge in " << params.picard_max
      << " iterations (last relative update " << out.report.update_norm << ")";
  throw SchemeError(msg.str());
}

SparseOperator implicit_operator(const FlowDiscretization& disc, const SchemeParams& params)
{
  return (1.0 / params.k) * disc.mass() + (params.nu + params.av) * disc.stiffness();
}

void require_state(const FlowDiscretization& disc, const FieldVector& v, const char* what)
{
  if (v.size() != disc.n_velocity())
    throw std::invalid_argument(std::string(what) + ": state vector missing or wrong length");
}

} // namespace

namespace {

// Initial Picard iterate: linear extrapolation in time once a previous level exists.
FieldVector predictor_guess(const SchemeState& state)
{
  if (state.u1_nm1.size() != state.u1_n.size())
    return state.u1_n;
  return 2.0 * state.u1_n - state.u1_nm1;
}

} // namespace

StepSolution predictor_step_av(const FlowDiscretization& disc, const SchemeState& state,
                               const SchemeParams& params, SaddleSolver& solver)
{
  params.validate();
  require_state(disc, state.u1_n, "predictor_step_av");
  const double t_new = state.t_n + params.k;
  const FieldVector rhs = (1.0 / params.k) * (disc.mass() * state.u1_n) + disc.forcing_load(t_new);
  return picard_solve(disc, params, implicit_operator(disc, params), rhs, t_new,
                      predictor_guess(state), solver, "predictor_step_av");
}

StepSolution predictor_step_sav(const FlowDiscretization& disc, const SchemeState& state,
                                const SchemeParams& params, const LargeScaleProjection& lspace,
                                SaddleSolver& solver)
{
  params.validate();
  require_state(disc, state.u1_n, "predictor_step_sav");
  if (!state.G_n)
    throw std::invalid_argument("predictor_step_sav: coarse gradient G_n not available");
  const double t_new = state.t_n + params.k;
  // G_n is frozen during the Picard loop.
  const FieldVector rhs = (1.0 / params.k) * (disc.mass() * state.u1_n) +
                          disc.forcing_load(t_new) + params.av * lspace.dissipation_load(*state.G_n);
  StepSolution out = picard_solve(disc, params, implicit_operator(disc, params), rhs, t_new,
                                  predictor_guess(state), solver, "predictor_step_sav");
  out.G = lspace.project(out.u);
  return out;
}

StepSolution corrector_step(const FlowDiscretization& disc, const SchemeState& state,
                            const SchemeParams& params, SaddleSolver& solver)
{
  params.validate();
  require_state(disc, state.u1_n, "corrector_step");
  require_state(disc, state.u1_np1, "corrector_step");
  require_state(disc, state.u2_n, "corrector_step");
  const double t_new = state.t_n + params.k;
  const ScalarSpace& velocity = disc.space().velocity;

  FieldVector rhs = (1.0 / params.k) * (disc.mass() * state.u2_n);
  rhs += 0.5 * (disc.forcing_load(t_new) + disc.forcing_load(state.t_n));

  const FieldVector delta = state.u1_np1 - state.u1_n;
  if (params.defect_form == DefectTermForm::GradientGradient) {
    // (nu/2) k (grad((u1' - u1)/k), grad v)
    rhs += 0.5 * params.nu * (disc.stiffness() * delta);
  } else {
    const SparseOperator sum_dir = assemble_gradient_coupling(velocity, velocity, 0) +
                                   assemble_gradient_coupling(velocity, velocity, 1);
    rhs += 0.5 * params.nu * (vector_block(sum_dir) * delta);
  }
  rhs += 0.5 * (assemble_convection_linearized(velocity, state.u1_np1) * state.u1_np1);
  rhs -= 0.5 * (assemble_convection_linearized(velocity, state.u1_n) * state.u1_n);
  rhs += params.av * (disc.stiffness() * state.u1_np1);

  // Advance the corrector's own trajectory by the predictor increment.
  const FieldVector guess = state.u2_n + delta;
  return picard_solve(disc, params, implicit_operator(disc, params), rhs, t_new, guess, solver,
                      "corrector_step");
}

// ---------------------------------------------------------------------------
// Time loop
// ---------------------------------------------------------------------------

DdcIntegrator::DdcIntegrator(const FlowDiscretization& disc, SchemeParams params,
                             const LargeScaleProjection* lspace)
    : disc_(disc), params_(params), lspace_(lspace), solver_(params.reuse_factors)
{
  params_.validate();
  if (!lspace_ && params_.predictor == PredictorKind::SAV)
    lspace_ = &disc_.projection();
}

void DdcIntegrator::initialize()
{
  const FlowProblem& problem = disc_.problem();
  const TaylorHoodSpace& th = disc_.space();
  const double viscosity = params_.nu + params_.av;

  StokesProjection init;
  const Point probe = th.velocity.dof_coordinates().front();
  if (problem.initial_velocity_gradient(probe)) {
    init = stokes_project_initial(
        disc_, [&problem](const Point& p) { return problem.initial_velocity(p); },
        [&problem](const Point& p) { return *problem.initial_velocity_gradient(p); },
        [&problem](const Point& p) { return problem.initial_pressure(p); }, viscosity,
        params_.solver_tol);
  } else {
    // Nodal interpolant with the t = 0 boundary data written over it.
    FieldVector u0 =
        interpolate([&problem](const Point& p) { return problem.initial_velocity(p); }, th.velocity);
    const FieldVector bc = disc_.dirichlet_values(0.0);
    for (std::size_t i = 0; i < disc_.dirichlet_dofs().size(); ++i)
      u0[disc_.dirichlet_dofs()[i]] = bc[static_cast<Index>(i)];
    init = stokes_project_discrete(disc_, u0, viscosity, params_.solver_tol);
  }

  state_ = SchemeState{};
  state_.u1_n = init.u;
  state_.u2_n = init.u;
  state_.u1_np1 = init.u;
  state_.u2_np1 = init.u;
  state_.p1_np1 = init.p;
  state_.p2_np1 = init.p;
  if (params_.predictor == PredictorKind::SAV)
    state_.G_n = lspace_->project(state_.u1_n);
  predictor_iterations_ = corrector_iterations_ = 0;
}

void DdcIntegrator::step(std::span<const StepObserver> observers)
{
  if (state_.u1_n.size() != disc_.n_velocity())
    throw std::logic_error("DdcIntegrator::step called before initialize");
  try {
    StepSolution pred = params_.predictor == PredictorKind::SAV
                            ? predictor_step_sav(disc_, state_, params_, *lspace_, solver_)
                            : predictor_step_av(disc_, state_, params_, solver_);
    state_.u1_np1 = std::move(pred.u);
    state_.p1_np1 = std::move(pred.p);

    StepSolution corr = corrector_step(disc_, state_, params_, solver_);
    state_.u2_np1 = std::move(corr.u);
    state_.p2_np1 = std::move(corr.p);

    predictor_iterations_ += pred.report.iterations;
    corrector_iterations_ += corr.report.iterations;
    const StepRecord record{disc_, params_, state_, pred.report, corr.report};
    for (const StepObserver& obs : observers)
      obs(record);

    state_.u1_nm1 = std::move(state_.u1_n);
    state_.u1_n = state_.u1_np1;
    state_.u2_n = state_.u2_np1;
    if (pred.G)
      state_.G_n = std::move(pred.G);
    ++state_.n;
    state_.t_n = state_.n * params_.k;
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "step " << state_.n << " (t = " << state_.t_n << " -> " << state_.t_n + params_.k
        << "): " << e.what();
    throw SchemeError(msg.str());
  }
}

RunSummary advance(const FlowDiscretization& disc, const SchemeParams& params,
                   std::span<const StepObserver> observers, const LargeScaleProjection* lspace)
{
  const auto start = std::chrono::steady_clock::now();
  const int n_steps = params.steps();
  DdcIntegrator integrator(disc, params, lspace);
  integrator.initialize();
  for (int n = 0; n < n_steps; ++n)
    integrator.step(observers);

  RunSummary summary;
  summary.steps = n_steps;
  summary.t_final = integrator.state().t_n;
  summary.predictor_iterations = integrator.predictor_iterations();
  summary.corrector_iterations = integrator.corrector_iterations();
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

} // namespace ddc
