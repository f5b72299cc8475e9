// ============================================================================
// src/linsolve.cpp - Cholesky mass solves and bordered saddle-point solves
// ============================================================================
#include "ddc/linsolve.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

namespace ddc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr int kMaxRefinement = 5;
constexpr int kMaxKrylov = 40;
// Refactorize once GMRES needs more iterations than this on stale factors.
constexpr int kRefactorAfter = 12;

using UmfLU = Eigen::UmfPackLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>>;

// Eigen preconditioner adaptor around an existing LU factorization.
class LuPreconditioner {
public:
  LuPreconditioner() = default;
  template <class M>
  explicit LuPreconditioner(const M&) {}
  template <class M>
  LuPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M>
  LuPreconditioner& factorize(const M&) { return *this; }
  template <class M>
  LuPreconditioner& compute(const M&) { return *this; }
  template <class Rhs>
  Eigen::VectorXd solve(const Rhs& b) const { return lu->solve(Eigen::VectorXd(b)); }
  Eigen::ComputationInfo info() { return Eigen::Success; }

  const UmfLU* lu = nullptr;
};

} // namespace

SpdSolver::SpdSolver(const SparseOperator& matrix) : matrix_(matrix)
{
  if (matrix.rows() != matrix.cols())
    throw SolverError("solve_spd: matrix is not square");
  llt_.compute(Eigen::SparseMatrix<double>(matrix));
  if (llt_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "solve_spd: Cholesky factorization failed (matrix not SPD), n=" << matrix.rows()
        << ", nnz=" << matrix.nonZeros();
    throw SolverError(msg.str());
  }
}

FieldVector SpdSolver::solve(const FieldVector& rhs, double tol, SolverReport* report) const
{
  const auto start = Clock::now();
  if (rhs.size() != matrix_.rows())
    throw SolverError("solve_spd: right-hand side has wrong length");
  const double bnorm = rhs.norm();
  FieldVector x = llt_.solve(rhs);
  FieldVector r = rhs - matrix_ * x;
  double rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
  int steps = 0;
  while (rel > tol && steps < kMaxRefinement) {
    x += llt_.solve(r);
    r = rhs - matrix_ * x;
    rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
    ++steps;
  }
  if (!std::isfinite(rel) || rel > tol) {
    std::ostringstream msg;
    msg << "solve_spd: relative residual " << rel << " above tolerance " << tol;
    throw SolverError(msg.str());
  }
  if (report) {
    report->residual = rel;
    report->refinement_steps = steps;
    report->reused_symbolic = true;
    report->seconds = seconds_since(start);
  }
  return x;
}

FieldVector solve_spd(const SparseOperator& matrix, const FieldVector& rhs, double tol)
{
  return SpdSolver(matrix).solve(rhs, tol);
}

SaddleSolver::SaddleSolver(bool reuse_factors) : reuse_factors_(reuse_factors) {}
SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

// Positions of every block entry inside the compressed bordered matrix, valid
// while the block patterns and the Dirichlet set stay the same.
struct SaddleSolver::ScatterPlan {
  std::vector<int> a_outer, a_inner, b_outer, b_inner;
  std::vector<Index> dirichlet;
  bool bordered = false;
  std::vector<int> a_pos;   // per A nonzero, -1 on Dirichlet rows
  std::vector<int> d_pos;   // identity entry per Dirichlet dof
  std::vector<int> b_pos;   // per B nonzero
  std::vector<int> bt_pos;  // per B nonzero, -1 in Dirichlet rows of B^T
  std::vector<int> c_row, c_col;

  bool matches(const SaddleSystem& sys) const
  {
    auto same = [](const std::vector<int>& v, const int* p, std::size_t n) {
      return v.size() == n && std::equal(v.begin(), v.end(), p);
    };
    const auto ra = static_cast<std::size_t>(sys.A.rows()) + 1;
    const auto rb = static_cast<std::size_t>(sys.B.rows()) + 1;
    return sys.A.isCompressed() && sys.B.isCompressed() &&
           bordered == sys.mean_constraint.has_value() && dirichlet == sys.dirichlet_dofs &&
           same(a_outer, sys.A.outerIndexPtr(), ra) &&
           same(a_inner, sys.A.innerIndexPtr(), static_cast<std::size_t>(sys.A.nonZeros())) &&
           same(b_outer, sys.B.outerIndexPtr(), rb) &&
           same(b_inner, sys.B.innerIndexPtr(), static_cast<std::size_t>(sys.B.nonZeros()));
  }
};

void SaddleSolver::fill_bordered(const SaddleSystem& sys, const std::vector<char>& fixed)
{
  const Index nu = static_cast<Index>(sys.A.rows());
  const Index np = static_cast<Index>(sys.B.rows());
  const bool bordered = sys.mean_constraint.has_value();

  if (plan_ && plan_->matches(sys)) {
    double* val = bordered_.valuePtr();
    const double* av = sys.A.valuePtr();
    for (std::size_t k = 0; k < plan_->a_pos.size(); ++k)
      if (plan_->a_pos[k] >= 0)
        val[plan_->a_pos[k]] = av[k];
    for (int pos : plan_->d_pos)
      val[pos] = 1.0;
    const double* bv = sys.B.valuePtr();
    for (std::size_t k = 0; k < plan_->b_pos.size(); ++k) {
      val[plan_->b_pos[k]] = bv[k];
      if (plan_->bt_pos[k] >= 0)
        val[plan_->bt_pos[k]] = bv[k];
    }
    for (std::size_t q = 0; q < plan_->c_row.size(); ++q) {
      val[plan_->c_row[q]] = (*sys.mean_constraint)[static_cast<Index>(q)];
      val[plan_->c_col[q]] = (*sys.mean_constraint)[static_cast<Index>(q)];
    }
    return;
  }

  // Build the pattern from triplets tagged with a source id, then read the
  // final position of every source entry back out of the compressed matrix.
  const Index n = nu + np + (bordered ? 1 : 0);
  auto plan = std::make_unique<ScatterPlan>();
  std::vector<Eigen::Triplet<double, int>> trip;
  std::vector<std::pair<int*, double>> sources;  // (position slot, value)
  const auto a_nnz = static_cast<std::size_t>(sys.A.nonZeros());
  const auto b_nnz = static_cast<std::size_t>(sys.B.nonZeros());
  plan->a_pos.assign(a_nnz, -1);
  plan->d_pos.assign(sys.dirichlet_dofs.size(), -1);
  plan->b_pos.assign(b_nnz, -1);
  plan->bt_pos.assign(b_nnz, -1);
  if (bordered) {
    plan->c_row.assign(static_cast<std::size_t>(np), -1);
    plan->c_col.assign(static_cast<std::size_t>(np), -1);
  }
  trip.reserve(a_nnz + 2 * b_nnz + 2 * static_cast<std::size_t>(np) + sys.dirichlet_dofs.size());
  sources.reserve(trip.capacity());
  auto add = [&](int r, int c, double v, int* slot) {
    sources.emplace_back(slot, v);
    trip.emplace_back(r, c, static_cast<double>(sources.size()));
  };

  std::vector<int> d_index(static_cast<std::size_t>(nu), -1);
  for (std::size_t k = 0; k < sys.dirichlet_dofs.size(); ++k)
    d_index[static_cast<std::size_t>(sys.dirichlet_dofs[k])] = static_cast<int>(k);
  for (Index i = 0; i < nu; ++i) {
    if (fixed[i]) {
      add(i, i, 1.0, &plan->d_pos[static_cast<std::size_t>(d_index[static_cast<std::size_t>(i)])]);
      continue;
    }
    for (int k = sys.A.outerIndexPtr()[i]; k < sys.A.outerIndexPtr()[i + 1]; ++k)
      add(i, sys.A.innerIndexPtr()[k], sys.A.valuePtr()[k], &plan->a_pos[static_cast<std::size_t>(k)]);
  }
  for (Index q = 0; q < np; ++q)
    for (int k = sys.B.outerIndexPtr()[q]; k < sys.B.outerIndexPtr()[q + 1]; ++k) {
      const int col = sys.B.innerIndexPtr()[k];
      const double v = sys.B.valuePtr()[k];
      add(nu + q, col, v, &plan->b_pos[static_cast<std::size_t>(k)]);
      if (!fixed[col])
        add(col, nu + q, v, &plan->bt_pos[static_cast<std::size_t>(k)]);
    }
  if (bordered)
    for (Index q = 0; q < np; ++q) {
      const double c = (*sys.mean_constraint)[q];
      add(nu + np, nu + q, c, &plan->c_row[static_cast<std::size_t>(q)]);
      add(nu + q, nu + np, c, &plan->c_col[static_cast<std::size_t>(q)]);
    }

  bordered_.resize(n, n);
  bordered_.setFromTriplets(trip.begin(), trip.end());
  bordered_.makeCompressed();
  if (static_cast<std::size_t>(bordered_.nonZeros()) != sources.size())
    throw SolverError("solve_saddle: duplicate entries in the block structure");
  double* val = bordered_.valuePtr();
  for (int pos = 0; pos < bordered_.nonZeros(); ++pos) {
    auto& [slot, v] = sources[static_cast<std::size_t>(val[pos]) - 1];
    *slot = pos;
    val[pos] = v;
  }

  if (sys.A.isCompressed() && sys.B.isCompressed()) {
    plan->a_outer.assign(sys.A.outerIndexPtr(), sys.A.outerIndexPtr() + nu + 1);
    plan->a_inner.assign(sys.A.innerIndexPtr(), sys.A.innerIndexPtr() + a_nnz);
    plan->b_outer.assign(sys.B.outerIndexPtr(), sys.B.outerIndexPtr() + np + 1);
    plan->b_inner.assign(sys.B.innerIndexPtr(), sys.B.innerIndexPtr() + b_nnz);
    plan->dirichlet = sys.dirichlet_dofs;
    plan->bordered = bordered;
    plan_ = std::move(plan);
  } else {
    plan_.reset();
  }
}

SaddleSolution SaddleSolver::solve(const SaddleSystem& sys, double tol)
{
  const auto start = Clock::now();
  const Index nu = static_cast<Index>(sys.A.rows());
  const Index np = static_cast<Index>(sys.B.rows());
  if (sys.A.cols() != nu || sys.B.cols() != nu || sys.f.size() != nu || sys.g.size() != np)
    throw SolverError("solve_saddle: inconsistent block dimensions");
  if (sys.dirichlet_values.size() != static_cast<Index>(sys.dirichlet_dofs.size()))
    throw SolverError("solve_saddle: Dirichlet dofs and values differ in length");
  const bool bordered = sys.mean_constraint.has_value();
  if (bordered && sys.mean_constraint->size() != np)
    throw SolverError("solve_saddle: mean constraint has wrong length");
  const Index n = nu + np + (bordered ? 1 : 0);

  std::vector<char> fixed(nu, 0);
  for (Index d : sys.dirichlet_dofs) {
    if (d < 0 || d >= nu)
      throw SolverError("solve_saddle: Dirichlet dof out of range");
    fixed[d] = 1;
  }

  fill_bordered(sys, fixed);


  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(nu) = sys.f;
  for (std::size_t k = 0; k < sys.dirichlet_dofs.size(); ++k)
    rhs[sys.dirichlet_dofs[k]] = sys.dirichlet_values[static_cast<Index>(k)];
  rhs.segment(nu, np) = sys.g;

  const bool same_pattern =
      lu_ && outer_.size() == static_cast<std::size_t>(n + 1) &&
      std::equal(outer_.begin(), outer_.end(), bordered_.outerIndexPtr()) &&
      inner_.size() == static_cast<std::size_t>(bordered_.nonZeros()) &&
      std::equal(inner_.begin(), inner_.end(), bordered_.innerIndexPtr());
  const double bnorm = rhs.norm();
  auto relative = [&](const Eigen::VectorXd& r) { return bnorm > 0.0 ? r.norm() / bnorm : r.norm(); };

  Eigen::VectorXd x;
  SolverReport report;
  report.reused_symbolic = same_pattern;
  if (!(reuse_factors_ && same_pattern && solve_with_stale_factors(rhs, tol, x, report))) {
    if (!same_pattern) {
      factored_ = bordered_;
      lu_ = std::make_unique<UmfLU>();
      lu_->umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
      lu_->umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
      lu_->umfpackControl()(UMFPACK_IRSTEP) = 0;  // refinement is done here, against the current matrix
      lu_->analyzePattern(factored_);
      outer_.assign(bordered_.outerIndexPtr(), bordered_.outerIndexPtr() + n + 1);
      inner_.assign(bordered_.innerIndexPtr(), bordered_.innerIndexPtr() + bordered_.nonZeros());
    }
    // UMFPACK keeps pointers into the factorized matrix, so it gets its own copy.
    factored_ = bordered_;
    lu_->factorize(factored_);
    ++factorizations_;
    refactor_next_ = false;
    if (lu_->info() != Eigen::Success) {
      outer_.clear();
      std::ostringstream msg;
      msg << "solve_saddle: factorization failed (singular system?), n=" << n;
      throw SolverError(msg.str());
    }
    x = lu_->solve(rhs);
    Eigen::VectorXd r = rhs - bordered_ * x;
    double rel = relative(r);
    int steps = 0;
    while (rel > tol && steps < kMaxRefinement && std::isfinite(rel)) {
      x += lu_->solve(r);
      r = rhs - bordered_ * x;
      rel = relative(r);
      ++steps;
    }
    if (!std::isfinite(rel) || rel > tol) {
      std::ostringstream msg;
      msg << "solve_saddle: relative residual " << rel << " above tolerance " << tol << " after "
          << steps << " refinement steps";
      throw SolverError(msg.str());
    }
    report.residual = rel;
    report.refinement_steps = steps;
  }
  if (reuse_factors_)
    last_x_ = x;
  SaddleSolution sol;
  sol.u = x.head(nu);
  for (std::size_t k = 0; k < sys.dirichlet_dofs.size(); ++k)
    sol.u[sys.dirichlet_dofs[k]] = sys.dirichlet_values[static_cast<Index>(k)];
  sol.p = x.segment(nu, np);
  sol.multiplier = bordered ? x[nu + np] : 0.0;
  report.seconds = seconds_since(start);
  sol.report = report;
  return sol;
}

bool SaddleSolver::solve_with_stale_factors(const Eigen::VectorXd& rhs, double tol, Eigen::VectorXd& x,
                                            SolverReport& report)
{
  if (refactor_next_ || !lu_ || lu_->info() != Eigen::Success)
    return false;
  Eigen::GMRES<ColMatrix, LuPreconditioner> gmres;
  gmres.preconditioner().lu = lu_.get();
  gmres.set_restart(kMaxKrylov);
  gmres.setMaxIterations(kMaxKrylov);
  // Warm start from the previous solution: consecutive systems are close.
  // GMRES measures convergence against the initial residual, so the target
  // is rescaled to a residual relative to the right-hand side; a second
  // round restarts from the first when the preconditioned estimate was optimistic.
  const double bnorm = rhs.norm();
  const double target = 0.5 * tol * bnorm;
  x = last_x_.size() == rhs.size() ? last_x_ : Eigen::VectorXd::Zero(rhs.size());
  double res = (rhs - bordered_ * x).norm();
  int iterations = 0;
  for (int round = 0; round < 2 && res > target && std::isfinite(res); ++round) {
    gmres.setTolerance(std::min(0.5, target / res));
    gmres.compute(bordered_);
    x = Eigen::VectorXd(gmres.solveWithGuess(rhs, x));
    iterations += static_cast<int>(gmres.iterations());
    res = (rhs - bordered_ * x).norm();
  }
  const double rel = bnorm > 0.0 ? res / bnorm : res;
  if (!std::isfinite(rel) || rel > tol)
    return false;
  // Accept, but refresh the factors before they degrade further.
  refactor_next_ = iterations > kRefactorAfter;
  report.residual = rel;
  report.krylov_iterations = iterations;
  report.reused_factors = true;
  return true;
}

SaddleSolution solve_saddle(const SaddleSystem& system, double tol)
{
  SaddleSolver solver;
  return solver.solve(system, tol);
}

} // namespace ddc
