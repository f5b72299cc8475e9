// ============================================================================
// src/analysis.cpp - error integration, rate tables, energy diagnostics
// ============================================================================
#include "ddc/analysis.hpp"

#include "ddc/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ddc {

namespace {

// Walks the cells of a space with physical quadrature data; fn(t, geometry,
// point, weight, shape, physical gradients) per quadrature point.
template <class Fn>
void for_each_qp(const ScalarSpace& space, Fn&& fn)
{
  const QuadratureRule& rule = assembly_rule();
  std::array<ShapeValues, 7> tab;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    tab[q] = eval_basis(space.degree(), rule.points[q]);
  std::array<Vec2, 6> grads;
  for (Index t = 0; t < space.mesh().n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(space.mesh(), t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      for (int i = 0; i < tab[q].n; ++i)
        grads[i] = g.inverse_transpose * tab[q].dphi[i];
      fn(t, g.map(rule.points[q]), rule.weights[q] * std::abs(g.det), tab[q], grads, q);
    }
  }
}

} // namespace

StepError step_error(const ScalarSpace& velocity, const FieldVector& u_h, const VectorFunction& exact,
                     const TensorFunction& exact_grad)
{
  const Index n = velocity.n_dofs();
  if (u_h.size() != 2 * n)
    throw std::invalid_argument("step_error: velocity vector has wrong length");
  double l2 = 0.0, h1 = 0.0;
  for_each_qp(velocity, [&](Index t, const Point& x, double w, const ShapeValues& s,
                            const std::array<Vec2, 6>& grads, std::size_t) {
    const auto dofs = velocity.cell_dofs(t);
    Vec2 uh = Vec2::Zero();
    Mat2 gh = Mat2::Zero();
    for (int i = 0; i < s.n; ++i) {
      uh.x() += u_h[dofs[i]] * s.phi[i];
      uh.y() += u_h[n + dofs[i]] * s.phi[i];
      gh.row(0) += u_h[dofs[i]] * grads[i].transpose();
      gh.row(1) += u_h[n + dofs[i]] * grads[i].transpose();
    }
    l2 += w * (exact(x) - uh).squaredNorm();
    h1 += w * (exact_grad(x) - gh).squaredNorm();
  });
  return {std::sqrt(l2), std::sqrt(h1)};
}

double l2_norm(const ScalarSpace& space, const VectorFunction& f)
{
  double sum = 0.0;
  for_each_qp(space, [&](Index, const Point& x, double w, const ShapeValues&,
                         const std::array<Vec2, 6>&, std::size_t) { sum += w * f(x).squaredNorm(); });
  return std::sqrt(sum);
}

double gradient_mismatch_sq(const ScalarSpace& velocity, const ScalarSpace& lspace,
                            const FieldVector& u_h, const CoarseGradient& g)
{
  const Index n = velocity.n_dofs();
  const QuadratureRule& rule = assembly_rule();
  std::array<ShapeValues, 7> ptab;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    ptab[q] = eval_basis(1, rule.points[q]);
  double sum = 0.0;
  for_each_qp(velocity, [&](Index t, const Point&, double w, const ShapeValues& s,
                            const std::array<Vec2, 6>& grads, std::size_t q) {
    const auto dofs = velocity.cell_dofs(t);
    const auto ldofs = lspace.cell_dofs(t);
    Mat2 gh = Mat2::Zero();
    for (int i = 0; i < s.n; ++i) {
      gh.row(0) += u_h[dofs[i]] * grads[i].transpose();
      gh.row(1) += u_h[n + dofs[i]] * grads[i].transpose();
    }
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d)
        for (int i = 0; i < 3; ++i)
          gh(c, d) -= g(c, d)[ldofs[i]] * ptab[q].phi[i];
    sum += w * gh.squaredNorm();
  });
  return sum;
}

void ErrorAccumulator::add(double k, const StepError& e)
{
  if (!(k > 0.0))
    throw std::invalid_argument("ErrorAccumulator: time step must be positive");
  sum_l2_ += k * e.l2 * e.l2;
  sum_h1_ += k * e.h1_semi * e.h1_semi;
  ++steps_;
}

SpaceTimeError ErrorAccumulator::finalize() const
{
  if (steps_ == 0 || steps_ < expected_)
    throw std::logic_error("ErrorAccumulator: finalize before the run completed");
  return {std::sqrt(sum_l2_), std::sqrt(sum_h1_)};
}

double convergence_rate(double e_coarse, double e_fine)
{
  if (!(e_coarse > 0.0) || !(e_fine > 0.0))
    throw std::invalid_argument("convergence_rate: errors must be positive");
  return std::log2(e_coarse / e_fine);
}

void RateTable::add_level(int inv_h, const SpaceTimeError& first, const SpaceTimeError& correction)
{
  RateRow row{inv_h, first, correction, {}, {}, {}, {}};
  if (!rows_.empty()) {
    const RateRow& prev = rows_.back();
    if (inv_h <= prev.inv_h)
      throw std::invalid_argument("RateTable: levels must increase");
    // Rates per mesh halving when consecutive levels differ by more than 2.
    const double halvings = std::log2(static_cast<double>(inv_h) / prev.inv_h);
    auto rate = [halvings](double c, double f) { return convergence_rate(c, f) / halvings; };
    row.cr1_l2 = rate(prev.first.l2_l2, first.l2_l2);
    row.cr1_h1 = rate(prev.first.l2_h1, first.l2_h1);
    row.cr2_l2 = rate(prev.correction.l2_l2, correction.l2_l2);
    row.cr2_h1 = rate(prev.correction.l2_h1, correction.l2_h1);
  }
  rows_.push_back(row);
}

void RateTable::write_row(std::ostream& os, const RateRow& r)
{
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << r.inv_h << ',' << format_double(r.first.l2_l2) << ',' << opt(r.cr1_l2) << ','
     << format_double(r.first.l2_h1) << ',' << opt(r.cr1_h1) << ','
     << format_double(r.correction.l2_l2) << ',' << opt(r.cr2_l2) << ','
     << format_double(r.correction.l2_h1) << ',' << opt(r.cr2_h1) << '\n';
}

void RateTable::write_csv(std::ostream& os) const
{
  os << kHeader << '\n';
  for (const RateRow& r : rows_)
    write_row(os, r);
}

double weak_divergence_norm(const SparseOperator& divergence, const FieldVector& u,
                            const FieldVector* mean_vector)
{
  FieldVector r = divergence * u;
  if (mean_vector) {
    const double cc = mean_vector->squaredNorm();
    if (cc > 0.0)
      r -= (mean_vector->dot(r) / cc) * (*mean_vector);
  }
  return r.norm();
}

EnergyMonitor::EnergyMonitor(const DdcIntegrator& integrator)
{
  const SchemeParams& p = integrator.params();
  const FlowDiscretization& disc = integrator.discretization();
  nu_ = p.nu;
  av_ = p.av;
  k_ = p.k;
  poincare_ = disc.problem().poincare_constant();
  sav_ = p.predictor == PredictorKind::SAV && integrator.state().G_n.has_value();
  lspace_ = &disc.large_scale_space();

  const FieldVector& u0 = integrator.state().u1_n;
  initial_l2_sq_ = u0.dot(disc.mass() * u0);
  const double grad_sq = u0.dot(disc.stiffness() * u0);
  initial_first_ = initial_l2_sq_ + av_ * grad_sq;
  dissipation_sum_ = nu_ * k_ * grad_sq;
  forcing_sum_first_ = k_ * forcing_sq_at(disc, integrator.state().t_n);
}

double EnergyMonitor::forcing_sq_at(const FlowDiscretization& disc, double t) const
{
  if (!disc.problem().has_forcing())
    return 0.0;
  const FlowProblem& pb = disc.problem();
  const double fn =
      l2_norm(disc.space().velocity, [&pb, t](const Point& x) { return pb.forcing(x, t); });
  return poincare_ * poincare_ * fn * fn;
}

void EnergyMonitor::observe(const StepRecord& rec)
{
  const FlowDiscretization& disc = rec.disc;
  const SchemeState& s = rec.state;
  const double t_new = s.t_n + k_;

  const FieldVector Mu1 = disc.mass() * s.u1_np1;
  const double u1_sq = s.u1_np1.dot(Mu1);
  const double g1_sq = s.u1_np1.dot(disc.stiffness() * s.u1_np1);
  dissipation_sum_ += nu_ * k_ * g1_sq;
  const double f_sq = k_ * forcing_sq_at(disc, t_new);
  forcing_sum_first_ += f_sq;
  forcing_sum_corr_ += f_sq;
  if (sav_ && s.G_n) {
    const ScalarSpace& vs = disc.space().velocity;
    subgrid_sum_ += av_ * k_ *
                    (gradient_mismatch_sq(vs, *lspace_, s.u1_np1, *s.G_n) +
                     gradient_mismatch_sq(vs, *lspace_, s.u1_n, *s.G_n));
  }

  EnergyRecord r;
  r.step = s.n + 1;
  r.t = t_new;
  const double u2_sq = s.u2_np1.dot(disc.mass() * s.u2_np1);
  r.kinetic = 0.5 * u2_sq;
  r.dissipation = nu_ * s.u2_np1.dot(disc.stiffness() * s.u2_np1);
  const FieldVector* c = disc.problem().zero_mean_pressure() ? &disc.mean_vector() : nullptr;
  r.divergence = weak_divergence_norm(disc.divergence(), s.u2_np1, c);
  r.divergence_first = weak_divergence_norm(disc.divergence(), s.u1_np1, c);
  r.picard_predictor = rec.predictor.iterations;
  r.picard_corrector = rec.corrector.iterations;

  const double lhs = u1_sq + av_ * g1_sq + dissipation_sum_ + subgrid_sum_;
  const double rhs = initial_first_ + forcing_sum_first_ / nu_;
  r.stability_slack = rhs - lhs;
  const double bound = 10.0 * (initial_l2_sq_ + forcing_sum_corr_ / (nu_ + av_));
  r.corrector_ratio = u2_sq / bound;

  const FieldVector diff = s.u2_np1 - s.u2_n;
  const double diff_l2 = std::sqrt(std::max(0.0, diff.dot(disc.mass() * diff)));
  const double u2_l2 = std::sqrt(std::max(0.0, u2_sq));
  r.step_change = u2_l2 > 0.0 ? diff_l2 / (k_ * u2_l2) : diff_l2 / k_;
  records_.push_back(r);
}

StepObserver EnergyMonitor::observer()
{
  return [this](const StepRecord& rec) { observe(rec); };
}

double EnergyMonitor::min_slack() const
{
  double m = std::numeric_limits<double>::infinity();
  for (const EnergyRecord& r : records_)
    m = std::min(m, r.stability_slack);
  return m;
}

double EnergyMonitor::max_corrector_ratio() const
{
  double m = 0.0;
  for (const EnergyRecord& r : records_)
    m = std::max(m, r.corrector_ratio);
  return m;
}

double EnergyMonitor::max_divergence() const
{
  double m = 0.0;
  for (const EnergyRecord& r : records_)
    m = std::max({m, r.divergence, r.divergence_first});
  return m;
}

void SteadyStateDetector::add(int step, double t, double step_change)
{
  if (!trigger_step_ && step_change < threshold_) {
    trigger_step_ = step;
    trigger_time_ = t;
  }
}

bool monotone_decay(const std::vector<double>& step_change, int window)
{
  if (window < 1)
    throw std::invalid_argument("monotone_decay: window must be positive");
  const std::size_t start = step_change.size() / 2;
  std::vector<double> maxima;
  for (std::size_t i = start; i + static_cast<std::size_t>(window) <= step_change.size();
       i += static_cast<std::size_t>(window))
    maxima.push_back(*std::max_element(step_change.begin() + static_cast<std::ptrdiff_t>(i),
                                       step_change.begin() + static_cast<std::ptrdiff_t>(i + window)));
  if (maxima.size() < 2)
    return false;
  for (std::size_t j = 1; j < maxima.size(); ++j)
    if (maxima[j] > maxima[j - 1])
      return false;
  return true;
}

} // namespace ddc
