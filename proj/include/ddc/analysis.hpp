// ============================================================================
// ddc/analysis.hpp - error norms, convergence tables and run diagnostics
// ============================================================================
#pragma once

#include "ddc/operators.hpp"
#include "ddc/schemes.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace ddc {

struct StepError {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

/// ||u - u_h|| and ||grad(u - u_h)|| with the exact field evaluated at the
/// quadrature points of the degree-5 rule.
StepError step_error(const ScalarSpace& velocity, const FieldVector& u_h, const VectorFunction& exact,
                     const TensorFunction& exact_grad);

/// L2 norm of a vector function over the mesh.
double l2_norm(const ScalarSpace& space, const VectorFunction& f);

/// ||grad u_h - G||^2 for a P1 coarse gradient on lspace.
double gradient_mismatch_sq(const ScalarSpace& velocity, const ScalarSpace& lspace,
                            const FieldVector& u_h, const CoarseGradient& g);

struct SpaceTimeError {
  double l2_l2 = 0.0;  // ||e||_{L2(0,T;L2)}
  double l2_h1 = 0.0;  // ||e||_{L2(0,T;H1)} with the H1 seminorm
};

/// Right-endpoint rectangle rule in time: k * sum_i ||e(t_i)||^2, i = 1..N.
class ErrorAccumulator {
public:
  explicit ErrorAccumulator(int expected_steps = 0) : expected_(expected_steps) {}

  void add(double k, const StepError& e);
  int steps() const { return steps_; }
  /// Throws std::logic_error before the expected number of steps was added.
  SpaceTimeError finalize() const;

private:
  int expected_;
  int steps_ = 0;
  double sum_l2_ = 0.0;
  double sum_h1_ = 0.0;
};

/// log2(e_coarse / e_fine) for a mesh-halving pair.
double convergence_rate(double e_coarse, double e_fine);

struct RateRow {
  int inv_h = 0;
  SpaceTimeError first;
  SpaceTimeError correction;
  // Rates against the previous row; empty for the first row.
  std::optional<double> cr1_l2, cr1_h1, cr2_l2, cr2_h1;
};

class RateTable {
public:
  void add_level(int inv_h, const SpaceTimeError& first, const SpaceTimeError& correction);
  const std::vector<RateRow>& rows() const { return rows_; }

  static constexpr const char* kHeader = "inv_h,e1_l2,cr1_l2,e1_h1,cr1_h1,e2_l2,cr2_l2,e2_h1,cr2_h1";
  void write_csv(std::ostream& os) const;
  static void write_row(std::ostream& os, const RateRow& row);

private:
  std::vector<RateRow> rows_;
};

/// max over zero-mean pressure test vectors q (|q| = 1) of q . D u, i.e. the
/// part of D u orthogonal to the mean vector c; plain |D u| when c is absent.
double weak_divergence_norm(const SparseOperator& divergence, const FieldVector& u,
                            const FieldVector* mean_vector);

/// Energy bookkeeping of the predictor and corrector trajectories:
///
///   first step:  ||u1'||^2 + av ||grad u1'||^2 + nu k sum_{i<=n+1} ||grad u1_i||^2
///                  [+ av k sum_{i<=n} (||grad u1_{i+1} - G_i||^2 + ||grad u1_i - G_i||^2)]
///                <= ||u0||^2 + av ||grad u0||^2 + (1/nu) k sum_{i<=n+1} (C_P ||f(t_i)||)^2
///   correction:  ||u2'||^2 <= 10 (||u0||^2 + (nu+av)^-1 k sum_{1<=i<=n+1} (C_P ||f(t_i)||)^2)
///
/// C_P ||f|| stands in for the dual norm ||f||_{-1}. Slack = right - left.
struct EnergyRecord {
  int step = 0;
  double t = 0.0;
  double kinetic = 0.0;       // 1/2 ||u2||^2
  double dissipation = 0.0;   // nu ||grad u2||^2
  double divergence = 0.0;    // weak divergence of u2
  double divergence_first = 0.0;
  int picard_predictor = 0;
  int picard_corrector = 0;
  double stability_slack = 0.0;
  double corrector_ratio = 0.0;  // ||u2||^2 over the correction bound (must stay <= 1)
  double step_change = 0.0;      // ||u2' - u2|| / (k ||u2'||)
};

class EnergyMonitor {
public:
  /// Reads the initial state from an initialized integrator.
  explicit EnergyMonitor(const DdcIntegrator& integrator);

  /// Observer entry point; appends one record per step.
  void observe(const StepRecord& record);
  StepObserver observer();

  const std::vector<EnergyRecord>& records() const { return records_; }
  double min_slack() const;
  double max_corrector_ratio() const;
  double max_divergence() const;

private:
  double forcing_sq_at(const FlowDiscretization& disc, double t) const;

  double nu_, av_, k_, poincare_;
  double initial_first_ = 0.0;   // ||u0||^2 + av ||grad u0||^2
  double initial_l2_sq_ = 0.0;   // ||u0||^2
  double dissipation_sum_ = 0.0; // nu k sum ||grad u1_i||^2
  double subgrid_sum_ = 0.0;
  double forcing_sum_first_ = 0.0;
  double forcing_sum_corr_ = 0.0;
  bool sav_ = false;
  const ScalarSpace* lspace_ = nullptr;
  std::vector<EnergyRecord> records_;
};

/// Fires once the relative step change ||u' - u|| / (k ||u'||) drops below
/// the threshold.
class SteadyStateDetector {
public:
  explicit SteadyStateDetector(double threshold = 1e-6) : threshold_(threshold) {}

  void add(int step, double t, double step_change);
  bool triggered() const { return trigger_step_.has_value(); }
  std::optional<int> trigger_step() const { return trigger_step_; }
  std::optional<double> trigger_time() const { return trigger_time_; }
  double threshold() const { return threshold_; }

private:
  double threshold_;
  std::optional<int> trigger_step_;
  std::optional<double> trigger_time_;
};

/// True when the windowed maxima of the step-change history are non-increasing
/// over the second half of the run, i.e. remaining unsteadiness only decays.
bool monotone_decay(const std::vector<double>& step_change, int window);

} // namespace ddc
