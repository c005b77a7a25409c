#include "douglab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace douglab {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw ConfigError("config: missing key '" + std::string(key) + "' in " + where);
  return j.at(key);
}

Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config: " + where + " must be a nonempty matrix");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j.at(r).is_array() || j.at(r).size() != cols)
      throw ConfigError("config: ragged matrix in " + where);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Vector parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config: " + where + " must be a nonempty vector");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json emit_matrix(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

json emit_vector(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Process parse_process(const std::string& s) {
  if (s == "sa") return Process::kSa;
  if (s == "coupled") return Process::kCoupled;
  if (s == "doug") return Process::kDoug;
  if (s == "averaging") return Process::kAveraging;
  throw ConfigError("config: unknown process '" + s + "'");
}

std::string process_name(Process p) {
  switch (p) {
    case Process::kSa: return "sa";
    case Process::kCoupled: return "coupled";
    case Process::kDoug: return "doug";
    case Process::kAveraging: return "averaging";
  }
  return "sa";
}

AdditiveKind parse_additive(const std::string& s) {
  if (s == "gaussian") return AdditiveKind::kGaussian;
  if (s == "uniform_cube") return AdditiveKind::kUniformCube;
  if (s == "rademacher_product") return AdditiveKind::kRademacherProduct;
  if (s == "centered_exponential") return AdditiveKind::kCenteredExponential;
  throw ConfigError("config: unknown additive noise '" + s + "'");
}

std::string additive_name(AdditiveKind k) {
  switch (k) {
    case AdditiveKind::kGaussian: return "gaussian";
    case AdditiveKind::kUniformCube: return "uniform_cube";
    case AdditiveKind::kRademacherProduct: return "rademacher_product";
    case AdditiveKind::kCenteredExponential: return "centered_exponential";
  }
  return "gaussian";
}

MultiplicativeKind parse_multiplicative(const std::string& s) {
  if (s == "none") return MultiplicativeKind::kNone;
  if (s == "scalar_rademacher") return MultiplicativeKind::kScalarRademacher;
  if (s == "scalar_gaussian") return MultiplicativeKind::kScalarGaussian;
  throw ConfigError("config: unknown multiplicative noise '" + s + "'");
}

std::string multiplicative_name(MultiplicativeKind k) {
  switch (k) {
    case MultiplicativeKind::kNone: return "none";
    case MultiplicativeKind::kScalarRademacher: return "scalar_rademacher";
    case MultiplicativeKind::kScalarGaussian: return "scalar_gaussian";
  }
  return "none";
}

W1Method parse_w1_method(const std::string& s) {
  if (s == "exact_1d") return W1Method::kExact1d;
  if (s == "exact_matching") return W1Method::kExactMatching;
  if (s == "sliced") return W1Method::kSliced;
  throw ConfigError("config: unknown w1 method '" + s + "'");
}

std::string w1_method_name(W1Method m) {
  switch (m) {
    case W1Method::kExact1d: return "exact_1d";
    case W1Method::kExactMatching: return "exact_matching";
    case W1Method::kSliced: return "sliced";
  }
  return "exact_1d";
}

Operator parse_operator(const json& j) {
  reject_unknown(j, {"kind", "jacobian", "x_star", "R1", "delta", "saturation",
                     "H", "epsilon"},
                 "problem.operator");
  const std::string kind = need(j, "kind", "problem.operator").get<std::string>();
  if (kind == "linear") {
    return make_linear_operator(parse_matrix(need(j, "jacobian", "operator"),
                                             "operator.jacobian"),
                                parse_vector(need(j, "x_star", "operator"),
                                             "operator.x_star"));
  }
  if (kind == "saturating_power") {
    return make_saturating_operator(
        parse_matrix(need(j, "jacobian", "operator"), "operator.jacobian"),
        parse_vector(need(j, "x_star", "operator"), "operator.x_star"),
        need(j, "R1", "operator").get<double>(),
        need(j, "delta", "operator").get<double>(),
        need(j, "saturation", "operator").get<double>());
  }
  if (kind == "logcosh_gradient") {
    return make_logcosh_operator(
        SpdMatrix(parse_matrix(need(j, "H", "operator"), "operator.H")),
        need(j, "epsilon", "operator").get<double>());
  }
  throw ConfigError("config: unknown operator kind '" + kind + "'");
}

json emit_operator(const Operator& op) {
  json j;
  switch (op.residual_kind) {
    case ResidualKind::kNone:
      j["kind"] = "linear";
      j["jacobian"] = emit_matrix(op.jacobian);
      j["x_star"] = emit_vector(op.x_star);
      break;
    case ResidualKind::kSaturatingPower:
      j["kind"] = "saturating_power";
      j["jacobian"] = emit_matrix(op.jacobian);
      j["x_star"] = emit_vector(op.x_star);
      j["R1"] = op.R1;
      j["delta"] = op.delta;
      j["saturation"] = op.saturation_s;
      break;
    case ResidualKind::kLogcoshGradient: {
      j["kind"] = "logcosh_gradient";
      const Eigen::Index d = op.dim();
      j["H"] = emit_matrix(-op.jacobian - op.logcosh_eps * Matrix::Identity(d, d));
      j["epsilon"] = op.logcosh_eps;
      break;
    }
  }
  return j;
}

Problem parse_problem(const json& j) {
  reject_unknown(j, {"operator", "noise", "certificate"}, "problem");
  Operator op = parse_operator(need(j, "operator", "problem"));

  const json& jn = need(j, "noise", "problem");
  reject_unknown(jn, {"additive", "sigma_b", "multiplicative",
                      "multiplicative_scale", "additive_scale"},
                 "problem.noise");
  NoiseModel noise(SpdMatrix(parse_matrix(need(jn, "sigma_b", "noise"), "noise.sigma_b")));
  noise.additive_kind =
      parse_additive(need(jn, "additive", "noise").get<std::string>());
  if (jn.contains("additive_scale"))
    noise.additive_scale = jn.at("additive_scale").get<double>();
  if (jn.contains("multiplicative"))
    noise.multiplicative_kind =
        parse_multiplicative(jn.at("multiplicative").get<std::string>());
  if (jn.contains("multiplicative_scale"))
    noise.multiplicative_scale = jn.at("multiplicative_scale").get<double>();
  if (noise.multiplicative_scale < 0)
    throw ConfigError("config: multiplicative_scale must be >= 0");

  const json& jc = need(j, "certificate", "problem");
  reject_unknown(jc, {"P", "gamma", "L_s", "u_2s"}, "problem.certificate");
  LyapunovCertificate cert(
      SpdMatrix(parse_matrix(need(jc, "P", "certificate"), "certificate.P")),
      need(jc, "gamma", "certificate").get<double>(),
      need(jc, "L_s", "certificate").get<double>(),
      jc.contains("u_2s") ? jc.at("u_2s").get<double>() : 1.0);

  if (noise.dim() != op.dim() || cert.P.dim() != op.dim())
    throw ConfigError("config: operator/noise/certificate dims differ");
  return Problem{std::move(op), std::move(noise), std::move(cert)};
}

json emit_problem(const Problem& p) {
  json j;
  j["operator"] = emit_operator(p.op);
  json jn;
  jn["additive"] = additive_name(p.noise.additive_kind);
  jn["sigma_b"] = emit_matrix(p.noise.sigma_b.mat());
  jn["multiplicative"] = multiplicative_name(p.noise.multiplicative_kind);
  jn["multiplicative_scale"] = p.noise.multiplicative_scale;
  jn["additive_scale"] = p.noise.additive_scale;
  j["noise"] = jn;
  json jc;
  jc["P"] = emit_matrix(p.certificate.P.mat());
  jc["gamma"] = p.certificate.gamma;
  jc["L_s"] = p.certificate.L_s;
  jc["u_2s"] = p.certificate.u_2s;
  j["certificate"] = jc;
  return j;
}

}  // namespace

CheckpointPlan ExperimentConfig::plan() const {
  if (!checkpoint_list.empty())
    return CheckpointPlan::explicit_list(checkpoint_list);
  return CheckpointPlan::geometric(schedule.K, horizon, checkpoint_factor);
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  reject_unknown(j,
                 {"seed", "process", "replicas", "horizon", "checkpoints",
                  "schedule", "x0", "problem", "w1", "stein", "rate_window",
                  "tails", "output_dir", "threads"},
                 "top level");

  const json& js = need(j, "schedule", "top level");
  reject_unknown(js, {"alpha", "K", "xi"}, "schedule");
  StepSchedule sched(need(js, "alpha", "schedule").get<double>(),
                     need(js, "K", "schedule").get<long long>(),
                     need(js, "xi", "schedule").get<double>());

  Problem problem = parse_problem(need(j, "problem", "top level"));

  ExperimentConfig c{.seed = 1,
                     .process = Process::kSa,
                     .replicas = 1,
                     .horizon = 1,
                     .checkpoint_factor = 2.0,
                     .checkpoint_list = {},
                     .schedule = sched,
                     .x0 = Vector::Zero(problem.dim()),
                     .problem = std::move(problem),
                     .w1 = {},
                     .stein_c2 = 2.0,
                     .rate_window = std::nullopt,
                     .tails = std::nullopt,
                     .output_dir = "out",
                     .threads = 0};

  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("process"))
    c.process = parse_process(j.at("process").get<std::string>());
  if (j.contains("replicas")) c.replicas = j.at("replicas").get<long long>();
  if (c.replicas < 1) throw ConfigError("config: replicas must be >= 1");
  c.horizon = need(j, "horizon", "top level").get<long long>();
  if (c.horizon < 1) throw ConfigError("config: horizon must be >= 1");
  if (j.contains("checkpoints")) {
    const json& jk = j.at("checkpoints");
    reject_unknown(jk, {"factor", "list"}, "checkpoints");
    if (jk.contains("factor")) c.checkpoint_factor = jk.at("factor").get<double>();
    if (jk.contains("list"))
      c.checkpoint_list = jk.at("list").get<std::vector<long long>>();
  }
  if (j.contains("x0")) c.x0 = parse_vector(j.at("x0"), "x0");
  if (c.x0.size() != c.problem.dim())
    throw ConfigError("config: x0 dim differs from problem dim");
  if (j.contains("w1")) {
    const json& jw = j.at("w1");
    reject_unknown(jw, {"method", "n_target", "n_projections", "bootstrap"}, "w1");
    if (jw.contains("method"))
      c.w1.method = parse_w1_method(jw.at("method").get<std::string>());
    if (jw.contains("n_target")) c.w1.n_target = jw.at("n_target").get<long long>();
    if (jw.contains("n_projections"))
      c.w1.n_projections = jw.at("n_projections").get<int>();
    if (jw.contains("bootstrap")) c.w1.bootstrap = jw.at("bootstrap").get<int>();
  }
  if (j.contains("stein")) {
    const json& jt = j.at("stein");
    reject_unknown(jt, {"C2"}, "stein");
    if (jt.contains("C2")) c.stein_c2 = jt.at("C2").get<double>();
  }
  if (j.contains("rate_window")) {
    const json& jr = j.at("rate_window");
    reject_unknown(jr, {"k_lo", "k_hi"}, "rate_window");
    RateWindow w;
    w.k_lo = need(jr, "k_lo", "rate_window").get<long long>();
    w.k_hi = need(jr, "k_hi", "rate_window").get<long long>();
    c.rate_window = w;
  }
  if (j.contains("tails")) {
    const json& jt = j.at("tails");
    reject_unknown(jt, {"a_grid", "zeta", "checkpoint"}, "tails");
    TailsConfig t;
    t.a_grid = need(jt, "a_grid", "tails").get<std::vector<double>>();
    t.zeta = parse_vector(need(jt, "zeta", "tails"), "tails.zeta");
    if (jt.contains("checkpoint")) t.checkpoint = jt.at("checkpoint").get<long long>();
    c.tails = t;
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();

  (void)c.plan();  // validates the checkpoint rule against the horizon
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["process"] = process_name(c.process);
  j["replicas"] = c.replicas;
  j["horizon"] = c.horizon;
  json jk;
  jk["factor"] = c.checkpoint_factor;
  if (!c.checkpoint_list.empty()) jk["list"] = c.checkpoint_list;
  j["checkpoints"] = jk;
  json js;
  js["alpha"] = c.schedule.alpha;
  js["K"] = c.schedule.K;
  js["xi"] = c.schedule.xi;
  j["schedule"] = js;
  j["x0"] = emit_vector(c.x0);
  j["problem"] = emit_problem(c.problem);
  json jw;
  jw["method"] = w1_method_name(c.w1.method);
  jw["n_target"] = c.w1.n_target;
  jw["n_projections"] = c.w1.n_projections;
  jw["bootstrap"] = c.w1.bootstrap;
  j["w1"] = jw;
  json jt;
  jt["C2"] = c.stein_c2;
  j["stein"] = jt;
  if (c.rate_window) {
    json jr;
    jr["k_lo"] = c.rate_window->k_lo;
    jr["k_hi"] = c.rate_window->k_hi;
    j["rate_window"] = jr;
  }
  if (c.tails) {
    json jj;
    jj["a_grid"] = c.tails->a_grid;
    jj["zeta"] = emit_vector(c.tails->zeta);
    jj["checkpoint"] = c.tails->checkpoint;
    j["tails"] = jj;
  }
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("DOUG_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace douglab
