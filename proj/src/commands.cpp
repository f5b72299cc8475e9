// ============================================================================
// src/commands.cpp - converge / run drivers and their output files
// ============================================================================
#include "ddc/commands.hpp"

#include "ddc/io.hpp"
#include "ddc/vtk.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef DDC_COMMIT
#define DDC_COMMIT "unknown"
#endif

namespace ddc {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

// Runs job(i) for i in [0, n) on up to `workers` threads; exceptions are
// captured per index.
template <class Job>
std::vector<std::exception_ptr> run_parallel(std::size_t n, int workers, Job&& job)
{
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (count <= 1) {
    worker();
    return errors;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < count; ++w)
    pool.emplace_back(worker);
  for (std::thread& t : pool)
    t.join();
  return errors;
}

std::string describe(const std::exception_ptr& e)
{
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

void write_config_echo(std::ostream& os, const RunConfig& config)
{
  os << "# config\n";
  std::istringstream in(config.source);
  std::string line;
  while (std::getline(in, line))
    os << "#   " << line << '\n';
}

} // namespace

int worker_count()
{
  const char* env = std::getenv("DDC_THREADS");
  if (!env || !*env)
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096)
    throw ConfigError(std::string("DDC_THREADS: expected a positive integer, got '") + env + "'");
  return static_cast<int>(v);
}

ConvergeLevel run_convergence_level(const RunConfig& config, int level, std::ostream* per_step)
{
  if (config.problem != ProblemKind::Manufactured)
    throw ConfigError("converge: requires problem = manufactured");
  const auto start = Clock::now();
  const SchemeParams params = scheme_params(config, level);
  const auto problem = make_problem(config);
  const FlowDiscretization disc(build_mesh(config, level), *problem);
  const int n_steps = params.steps();

  ErrorAccumulator acc1(n_steps), acc2(n_steps);
  double max_div = 0.0;
  const FieldVector* mean = problem->zero_mean_pressure() ? &disc.mean_vector() : nullptr;
  if (per_step)
    *per_step << "step,t,e1_l2,e1_h1,e2_l2,e2_h1\n";

  auto errors = [&](const StepRecord& rec) {
    const double t = (rec.state.n + 1) * params.k;
    const ScalarSpace& vs = disc.space().velocity;
    auto exact = [t](const Point& x) { return ManufacturedProblem::exact_velocity_at(x.x(), x.y(), t); };
    auto grad = [t](const Point& x) { return ManufacturedProblem::exact_gradient_at(x.x(), x.y(), t); };
    const StepError e1 = step_error(vs, rec.state.u1_np1, exact, grad);
    const StepError e2 = step_error(vs, rec.state.u2_np1, exact, grad);
    acc1.add(params.k, e1);
    acc2.add(params.k, e2);
    max_div = std::max({max_div, weak_divergence_norm(disc.divergence(), rec.state.u1_np1, mean),
                        weak_divergence_norm(disc.divergence(), rec.state.u2_np1, mean)});
    if (per_step)
      *per_step << rec.state.n + 1 << ',' << format_double(t) << ',' << format_double(e1.l2) << ','
                << format_double(e1.h1_semi) << ',' << format_double(e2.l2) << ','
                << format_double(e2.h1_semi) << '\n';
  };
  const std::vector<StepObserver> observers{errors};

  ConvergeLevel out;
  out.inv_h = level;
  out.summary = advance(disc, params, observers);
  out.first = acc1.finalize();
  out.correction = acc2.finalize();
  out.max_divergence = max_div;
  out.seconds = seconds_since(start);
  return out;
}

ConvergeReport cmd_converge(const RunConfig& config, std::ostream& log)
{
  if (config.problem != ProblemKind::Manufactured)
    throw ConfigError("converge: requires problem = manufactured");
  ensure_dir(config.output_dir);
  const auto start = Clock::now();
  const int workers = worker_count();

  std::vector<ConvergeLevel> results(config.levels.size());
  std::mutex log_mutex;
  const auto errors = run_parallel(config.levels.size(), workers, [&](std::size_t i) {
    const int level = config.levels[i];
    std::ostringstream per_step;
    results[i] = run_convergence_level(config, level, &per_step);
    auto out = open_output(fs::path(config.output_dir) / ("level_" + std::to_string(level) + ".csv"));
    out << per_step.str();
    std::lock_guard lock(log_mutex);
    log << "level 1/h=" << level << ": " << results[i].summary.steps << " steps, "
        << results[i].seconds << " s\n";
  });

  ConvergeReport report;
  report.complete = true;
  for (std::size_t i = 0; i < config.levels.size(); ++i) {
    if (errors[i]) {
      report.complete = false;
      report.failure = "level 1/h=" + std::to_string(config.levels[i]) + ": " + describe(errors[i]);
      break;
    }
    report.table.add_level(results[i].inv_h, results[i].first, results[i].correction);
    report.levels.push_back(results[i]);
  }

  {
    auto csv = open_output(fs::path(config.output_dir) / "rates.csv");
    report.table.write_csv(csv);
    if (!report.complete)
      csv << "# incomplete: " << report.failure << '\n';
  }
  {
    auto txt = open_output(fs::path(config.output_dir) / "rates_report.txt");
    txt << "# ddc converge\n# commit " << DDC_COMMIT << '\n';
    write_config_echo(txt, config);
    txt << "# workers " << workers << '\n';
    for (const ConvergeLevel& l : report.levels)
      txt << "# level 1/h=" << l.inv_h << " steps " << l.summary.steps << " picard "
          << l.summary.predictor_iterations << '/' << l.summary.corrector_iterations << " max_div "
          << format_double(l.max_divergence) << " wall " << l.seconds << " s\n";
    txt << "# total wall " << seconds_since(start) << " s\n";
    txt << "# status " << (report.complete ? "complete" : "incomplete: " + report.failure) << '\n';
    report.table.write_csv(txt);
  }
  return report;
}

std::vector<RunLevelResult> cmd_run(const RunConfig& config, std::ostream& log)
{
  ensure_dir(config.output_dir);
  const fs::path dir(config.output_dir);
  std::vector<RunLevelResult> results;

  for (int level : config.levels) {
    const auto start = Clock::now();
    const SchemeParams params = scheme_params(config, level);
    const auto problem = make_problem(config);
    const FlowDiscretization disc(build_mesh(config, level), *problem);
    const int n_steps = params.steps();
    const std::string tag = std::to_string(level);

    DdcIntegrator integrator(disc, params);
    integrator.initialize();
    EnergyMonitor monitor(integrator);
    SteadyStateDetector detector(config.steady_tol);

    const bool exact = problem->has_exact_solution();
    ErrorAccumulator acc1(n_steps), acc2(n_steps);
    auto errors = [&](const StepRecord& rec) {
      const double t = (rec.state.n + 1) * params.k;
      const FlowProblem& pb = *problem;
      auto u = [&pb, t](const Point& x) { return pb.exact_velocity(x, t); };
      auto g = [&pb, t](const Point& x) { return pb.exact_velocity_gradient(x, t); };
      acc1.add(params.k, step_error(disc.space().velocity, rec.state.u1_np1, u, g));
      acc2.add(params.k, step_error(disc.space().velocity, rec.state.u2_np1, u, g));
    };
    std::vector<StepObserver> observers{monitor.observer()};
    if (exact)
      observers.push_back(errors);

    auto snapshot = [&](int step) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%s_%06d.vtk", tag.c_str(), step);
      auto out = open_output(dir / name);
      const SchemeState& s = integrator.state();
      const FieldVector& p = s.p2_np1.size() ? s.p2_np1 : FieldVector(FieldVector::Zero(disc.n_pressure()));
      write_vtk_snapshot(out, disc.space(), s.u2_n, p, &s.u1_n,
                         "ddc " + std::string(to_string(config.predictor)) + " step " + std::to_string(step));
    };

    auto diag = open_output(dir / ("diagnostics_" + tag + ".csv"));
    diag << "step,t,kinetic,dissipation,divergence,divergence_first,picard_predictor,picard_corrector,"
            "stability_slack,corrector_ratio,step_change\n";
    snapshot(0);
    std::exception_ptr failure;
    for (int n = 0; n < n_steps; ++n) {
      try {
        integrator.step(observers);
      } catch (...) {
        failure = std::current_exception();
        break;
      }
      const EnergyRecord& r = monitor.records().back();
      detector.add(r.step, r.t, r.step_change);
      diag << r.step << ',' << format_double(r.t) << ',' << format_double(r.kinetic) << ','
           << format_double(r.dissipation) << ',' << format_double(r.divergence) << ','
           << format_double(r.divergence_first) << ',' << r.picard_predictor << ','
           << r.picard_corrector << ',' << format_double(r.stability_slack) << ','
           << format_double(r.corrector_ratio) << ',' << format_double(r.step_change) << '\n';
      const int step = n + 1;
      if (step == n_steps || (config.snapshot_every > 0 && step % config.snapshot_every == 0))
        snapshot(step);
    }
    diag.flush();
    if (failure)
      std::rethrow_exception(failure);

    RunLevelResult res;
    res.inv_h = level;
    res.summary.steps = n_steps;
    res.summary.t_final = integrator.state().t_n;
    res.summary.predictor_iterations = integrator.predictor_iterations();
    res.summary.corrector_iterations = integrator.corrector_iterations();
    res.summary.seconds = seconds_since(start);
    res.records = monitor.records();
    res.min_slack = monitor.min_slack();
    res.max_corrector_ratio = monitor.max_corrector_ratio();
    res.max_divergence = monitor.max_divergence();
    std::vector<double> changes;
    for (const EnergyRecord& r : res.records) {
      res.max_kinetic = std::max(res.max_kinetic, r.kinetic);
      changes.push_back(r.step_change);
    }
    res.steady_step = detector.trigger_step();
    res.steady_time = detector.trigger_time();
    res.monotone_decay = monotone_decay(changes, std::max(1, n_steps / 20));

    if (exact) {
      res.first = acc1.finalize();
      res.correction = acc2.finalize();
      RateTable table;
      table.add_level(level, *res.first, *res.correction);
      auto out = open_output(dir / ("errors_" + tag + ".csv"));
      table.write_csv(out);
    }

    auto sum = open_output(dir / ("summary_" + tag + ".txt"));
    sum << "# ddc run\n# commit " << DDC_COMMIT << '\n';
    write_config_echo(sum, config);
    sum << "inv_h = " << level << "\nsteps = " << n_steps << "\nk = " << format_double(params.k)
        << "\nav = " << format_double(params.av) << "\nmax_kinetic = " << format_double(res.max_kinetic)
        << "\nmin_stability_slack = " << format_double(res.min_slack)
        << "\nmax_corrector_ratio = " << format_double(res.max_corrector_ratio)
        << "\nmax_divergence = " << format_double(res.max_divergence) << "\nsteady_state = "
        << (res.steady_step ? "step " + std::to_string(*res.steady_step) + " t " + format_double(*res.steady_time)
                            : std::string("not reached"))
        << "\nmonotone_decay = " << (res.monotone_decay ? "yes" : "no")
        << "\npicard_iterations = " << res.summary.predictor_iterations << '/'
        << res.summary.corrector_iterations << "\nwall_seconds = " << res.summary.seconds << '\n';
    log << "run 1/h=" << level << ": " << n_steps << " steps, " << res.summary.seconds << " s, steady "
        << (res.steady_step ? "yes" : "no") << '\n';
    results.push_back(std::move(res));
  }
  return results;
}

} // namespace ddc
