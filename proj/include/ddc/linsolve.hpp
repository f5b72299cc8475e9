// ============================================================================
// ddc/linsolve.hpp - SPD and saddle-point linear solves
//
// Saddle systems are posed as
//
//     [ A  B^T ] [u]   [f]
//     [ B   0  ] [p] = [g]
//
// with velocity Dirichlet rows replaced by identity rows and, when requested,
// the pressure mean fixed to zero through a Lagrange multiplier that borders
// the system with the vector c, c_i = integral of the i-th pressure basis
// function. The bordered matrix is factorized by UMFPACK; the symbolic
// analysis is reused while the sparsity pattern stays unchanged.
//
// A SaddleSolver may also keep the numeric factors of an earlier matrix and
// use them to precondition GMRES on the next one. Successive Picard and time
// step matrices differ only in the advecting velocity, so a few Krylov
// iterations usually reach the requested residual; the matrix is refactorized
// whenever they do not.
// ============================================================================
#pragma once

#include "ddc/sparse.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/UmfPackSupport>

#include <memory>
#include <optional>
#include <vector>

namespace ddc {

struct SolverReport {
  double residual = 0.0;       // relative residual of the final iterate
  int refinement_steps = 0;    // iterative refinement passes after the direct solve
  bool reused_symbolic = false;
  bool reused_factors = false;  // solved by GMRES on earlier factors
  int krylov_iterations = 0;
  double seconds = 0.0;
};

/// Cached Cholesky factorization of a symmetric positive definite matrix.
class SpdSolver {
public:
  explicit SpdSolver(const SparseOperator& matrix);

  /// Throws SolverError when the relative residual cannot be brought below tol.
  FieldVector solve(const FieldVector& rhs, double tol, SolverReport* report = nullptr) const;

  const SparseOperator& matrix() const { return matrix_; }

private:
  SparseOperator matrix_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

FieldVector solve_spd(const SparseOperator& matrix, const FieldVector& rhs, double tol = 1e-10);

struct SaddleSystem {
  SparseOperator A;  // n_u x n_u
  SparseOperator B;  // n_p x n_u
  FieldVector f;     // n_u
  FieldVector g;     // n_p
  std::vector<Index> dirichlet_dofs;
  FieldVector dirichlet_values;  // same length as dirichlet_dofs
  std::optional<FieldVector> mean_constraint;
};

struct SaddleSolution {
  FieldVector u;
  FieldVector p;
  double multiplier = 0.0;
  SolverReport report;
};

class SaddleSolver {
public:
  /// reuse_factors enables the lagged-factorization GMRES path.
  explicit SaddleSolver(bool reuse_factors = false);
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;
  SaddleSolver& operator=(SaddleSolver&&) noexcept;

  SaddleSolution solve(const SaddleSystem& system, double tol = 1e-10);

  int factorizations() const { return factorizations_; }

private:
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  struct ScatterPlan;
  void fill_bordered(const SaddleSystem& system, const std::vector<char>& fixed);
  bool solve_with_stale_factors(const Eigen::VectorXd& rhs, double tol, Eigen::VectorXd& x,
                                SolverReport& report);

  bool reuse_factors_;
  bool refactor_next_ = false;
  int factorizations_ = 0;
  ColMatrix bordered_, factored_;
  Eigen::VectorXd last_x_;
  std::unique_ptr<ScatterPlan> plan_;
  std::unique_ptr<Eigen::UmfPackLU<ColMatrix>> lu_;
  std::vector<int> outer_, inner_;
};

SaddleSolution solve_saddle(const SaddleSystem& system, double tol = 1e-10);

} // namespace ddc
