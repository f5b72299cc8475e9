// ============================================================================
// src/config.cpp - key = value configuration parsing and validation
// ============================================================================
#include "ddc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ddc {

namespace {

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& why)
{
  throw ConfigError("config: " + key + ": " + why);
}

double to_double(const std::string& key, const std::string& v)
{
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(key, "not a number '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(out))
    fail(key, "not a number '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v)
{
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(key, "not an integer '" + v + "'");
  return out;
}

} // namespace

std::string_view to_string(PredictorKind kind)
{
  return kind == PredictorKind::AV ? "av" : "sav";
}

std::string_view to_string(ProblemKind kind)
{
  return kind == ProblemKind::Manufactured ? "manufactured" : "step_channel";
}

RunConfig parse_config(std::string_view text)
{
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size())
        break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      fail(key, "given more than once");
    if (end == text.size())
      break;
  }

  RunConfig c;
  c.source = std::string(text);
  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end())
      return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const auto problem = take("problem");
  if (!problem)
    fail("problem", "required");
  if (*problem == "manufactured")
    c.problem = ProblemKind::Manufactured;
  else if (*problem == "step_channel")
    c.problem = ProblemKind::StepChannel;
  else
    fail("problem", "expected manufactured or step_channel");

  const auto predictor = take("predictor");
  if (!predictor)
    fail("predictor", "required");
  if (*predictor == "av")
    c.predictor = PredictorKind::AV;
  else if (*predictor == "sav")
    c.predictor = PredictorKind::SAV;
  else
    fail("predictor", "expected av or sav");

  const auto levels = take("levels");
  if (!levels)
    fail("levels", "required");
  {
    std::stringstream ss(*levels);
    std::string item;
    while (std::getline(ss, item, ','))
      c.levels.push_back(to_int("levels", std::string(trim(item))));
  }
  if (c.levels.empty())
    fail("levels", "empty");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    if (c.levels[i] < 1)
      fail("levels", "must be positive");
    if (i > 0) {
      const int ratio = c.levels[i] / c.levels[0];
      if (c.levels[i] <= c.levels[i - 1] || c.levels[i] % c.levels[0] != 0 || (ratio & (ratio - 1)) != 0)
        fail("levels", "must increase by powers-of-two multiples of the first level");
    }
  }

  const bool channel = c.problem == ProblemKind::StepChannel;
  c.nu = channel ? StepChannelProblem::kViscosity : 0.1;
  c.T = channel ? 40.0 : 1.0;
  if (auto v = take("nu"))
    c.nu = to_double("nu", *v);
  if (auto v = take("T"))
    c.T = to_double("T", *v);
  if (auto v = take("dt_rule")) {
    if (*v == "half_h")
      c.dt_rule = DtRule::HalfH;
    else if (*v == "fixed")
      c.dt_rule = DtRule::Fixed;
    else
      fail("dt_rule", "expected half_h or fixed");
  }
  if (auto v = take("dt_fixed"))
    c.dt_fixed = to_double("dt_fixed", *v);
  if (auto v = take("av_rule")) {
    if (*v == "equals_dt")
      c.av_rule = AvRule::EqualsDt;
    else if (*v == "fixed")
      c.av_rule = AvRule::Fixed;
    else
      fail("av_rule", "expected equals_dt or fixed");
  }
  if (auto v = take("av_fixed"))
    c.av_fixed = to_double("av_fixed", *v);
  if (auto v = take("picard_tol"))
    c.picard_tol = to_double("picard_tol", *v);
  if (auto v = take("picard_max"))
    c.picard_max = to_int("picard_max", *v);
  if (auto v = take("solver_tol"))
    c.solver_tol = to_double("solver_tol", *v);
  if (auto v = take("defect_term_form")) {
    if (*v == "gradient_gradient")
      c.defect_form = DefectTermForm::GradientGradient;
    else if (*v == "literal")
      c.defect_form = DefectTermForm::Literal;
    else
      fail("defect_term_form", "expected gradient_gradient or literal");
  }
  if (auto v = take("output_dir"))
    c.output_dir = *v;
  if (auto v = take("snapshot_every"))
    c.snapshot_every = to_int("snapshot_every", *v);
  if (auto v = take("steady_tol"))
    c.steady_tol = to_double("steady_tol", *v);

  if (!kv.empty())
    fail(kv.begin()->first, "unknown key");

  if (!(c.nu > 0.0))
    fail("nu", "must be positive");
  if (!(c.T > 0.0))
    fail("T", "must be positive");
  if (c.dt_rule == DtRule::Fixed && !(c.dt_fixed > 0.0))
    fail("dt_fixed", "must be positive when dt_rule = fixed");
  if (c.av_rule == AvRule::Fixed && !(c.av_fixed >= 0.0))
    fail("av_fixed", "must be non-negative when av_rule = fixed");
  if (!(c.picard_tol > 0.0))
    fail("picard_tol", "must be positive");
  if (c.picard_max < 1)
    fail("picard_max", "must be positive");
  if (!(c.solver_tol > 0.0))
    fail("solver_tol", "must be positive");
  if (c.snapshot_every < 0)
    fail("snapshot_every", "must be non-negative");
  if (!(c.steady_tol > 0.0))
    fail("steady_tol", "must be positive");
  for (int level : c.levels) {
    try {
      scheme_params(c, level).steps();
    } catch (const std::invalid_argument& e) {
      fail("levels", "level " + std::to_string(level) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double nominal_h(int level)
{
  return 1.0 / level;
}

SchemeParams scheme_params(const RunConfig& config, int level)
{
  SchemeParams p;
  p.nu = config.nu;
  p.k = config.dt_rule == DtRule::HalfH ? 0.5 * nominal_h(level) : config.dt_fixed;
  p.av = config.av_rule == AvRule::EqualsDt ? p.k : config.av_fixed;
  p.T = config.T;
  p.picard_tol = config.picard_tol;
  p.picard_max = config.picard_max;
  p.solver_tol = config.solver_tol;
  p.predictor = config.predictor;
  p.defect_form = config.defect_form;
  p.validate();
  return p;
}

std::shared_ptr<const Mesh> build_mesh(const RunConfig& config, int level)
{
  if (config.problem == ProblemKind::Manufactured)
    return std::make_shared<const Mesh>(build_rectangle_mesh(0.0, 0.0, 1.0, 1.0, level, level));
  return std::make_shared<const Mesh>(build_step_channel_mesh(nominal_h(level)));
}

std::unique_ptr<FlowProblem> make_problem(const RunConfig& config)
{
  if (config.problem == ProblemKind::Manufactured)
    return std::make_unique<ManufacturedProblem>(config.nu);
  return std::make_unique<StepChannelProblem>(config.nu);
}

} // namespace ddc
