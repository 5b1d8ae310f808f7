#include "bgeva/archive.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bgeva/error.hpp"

namespace bgeva {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  if (!a.is_array()) throw FormatError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw FormatError("non-numeric entry in a numeric array");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

json mat_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd json_mat(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw FormatError("matrix data length does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
  return m;
}

json link_json(const LinkKind& link) {
  return {{"text", link.to_string()}, {"tau", link.tau}, {"domain_eps", link.domain_eps}};
}

LinkKind json_link(const json& j) {
  LinkKind link = LinkKind::parse(j.at("text").get<std::string>());
  if (link.is_gev()) link.tau = j.at("tau").get<double>();
  link.domain_eps = j.at("domain_eps").get<double>();
  return link;
}

json basis_json(const BasisMap& b) {
  return {{"kind", to_string(b.kind)}, {"k", b.k},           {"penalty_order", b.penalty_order},
          {"shift", b.shift},         {"scale", b.scale},   {"x_min", b.x_min},
          {"x_max", b.x_max},         {"knots", b.knots},   {"transform", mat_json(b.transform)},
          {"column_means", vec_json(b.column_means)}};
}

BasisMap json_basis(const json& j) {
  BasisMap b;
  b.kind = parse_basis_kind(j.at("kind").get<std::string>());
  b.k = j.at("k").get<int>();
  b.penalty_order = j.at("penalty_order").get<int>();
  b.shift = j.at("shift").get<double>();
  b.scale = j.at("scale").get<double>();
  b.x_min = j.at("x_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.knots = j.at("knots").get<std::vector<double>>();
  b.transform = json_mat(j.at("transform"));
  b.column_means = json_vec(j.at("column_means"));
  return b;
}

}  // namespace

std::string dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, data.response().data(), sizeof(double) * data.n());
  h = fnv1a(h, data.covariates().data(), sizeof(double) * data.n() * data.p());
  for (const auto& name : data.names()) h = fnv1a(h, name.data(), name.size() + 1);
  if (data.year()) h = fnv1a(h, data.year()->data(), sizeof(int) * data.year()->size());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

json config_to_json(const FitConfig& cfg) {
  json j = {{"max_outer", cfg.max_outer},
            {"max_inner", cfg.max_inner},
            {"tol_delta", cfg.tol_delta},
            {"tol_lambda", cfg.tol_lambda},
            {"log10_lambda_min", cfg.log10_lambda_min},
            {"log10_lambda_max", cfg.log10_lambda_max},
            {"log10_lambda_step", cfg.log10_lambda_step},
            {"golden_width", cfg.golden_width},
            {"max_lambda_cycles", cfg.max_lambda_cycles},
            {"lambda_cycle_tol", cfg.lambda_cycle_tol},
            {"trust_radius_init", cfg.trust_radius_init},
            {"tau_grid", cfg.tau_grid},
            {"tau_metric", to_string(cfg.tau_metric)},
            {"severity_ratio", cfg.severity_ratio},
            {"seed", cfg.seed}};
  if (cfg.fixed_lambdas) j["fixed_lambdas"] = vec_json(*cfg.fixed_lambdas);
  return j;
}

FitConfig config_from_json(const json& j) {
  FitConfig cfg;
  cfg.max_outer = j.value("max_outer", cfg.max_outer);
  cfg.max_inner = j.value("max_inner", cfg.max_inner);
  cfg.tol_delta = j.value("tol_delta", cfg.tol_delta);
  cfg.tol_lambda = j.value("tol_lambda", cfg.tol_lambda);
  cfg.log10_lambda_min = j.value("log10_lambda_min", cfg.log10_lambda_min);
  cfg.log10_lambda_max = j.value("log10_lambda_max", cfg.log10_lambda_max);
  cfg.log10_lambda_step = j.value("log10_lambda_step", cfg.log10_lambda_step);
  cfg.golden_width = j.value("golden_width", cfg.golden_width);
  cfg.max_lambda_cycles = j.value("max_lambda_cycles", cfg.max_lambda_cycles);
  cfg.lambda_cycle_tol = j.value("lambda_cycle_tol", cfg.lambda_cycle_tol);
  cfg.trust_radius_init = j.value("trust_radius_init", cfg.trust_radius_init);
  cfg.tau_grid = j.value("tau_grid", cfg.tau_grid);
  if (j.contains("tau_metric")) cfg.tau_metric = parse_tau_metric(j.at("tau_metric").get<std::string>());
  cfg.severity_ratio = j.value("severity_ratio", cfg.severity_ratio);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("fixed_lambdas")) cfg.fixed_lambdas = json_vec(j.at("fixed_lambdas"));
  return cfg;
}

json model_to_json(const FittedModel& m) {
  json terms = json::array();
  for (const auto& t : m.terms) {
    json jt = {{"name", t.name},
               {"kind", t.kind == TermKind::smooth ? "smooth" : "parametric"},
               {"span", {t.span.start, t.span.size}},
               {"null_dim", t.null_dim}};
    if (t.basis) {
      jt["basis"] = basis_json(*t.basis);
      jt["penalty"] = mat_json(t.penalty);
    }
    terms.push_back(std::move(jt));
  }
  json training = json::object();
  for (const auto& [name, x] : m.training_x) training[name] = vec_json(x);
  const auto& d = m.diagnostics;
  return {{"formula", m.spec.to_string()},
          {"link", link_json(m.link)},
          {"terms", std::move(terms)},
          {"delta", vec_json(m.delta)},
          {"covariance", mat_json(m.covariance)},
          {"hessian", mat_json(m.hessian)},
          {"smoothing",
           {{"lambdas", vec_json(m.smoothing.lambdas)},
            {"edf_total", m.smoothing.edf_total},
            {"edf_per_term", m.smoothing.edf_per_term},
            {"ubre", m.smoothing.ubre}}},
          {"converged", m.converged},
          {"diagnostics",
           {{"outer_iterations", d.outer_iterations},
            {"inner_iterations", d.inner_iterations},
            {"levenberg_shifts", d.levenberg_shifts},
            {"rejected_steps", d.rejected_steps},
            {"inner_converged", d.inner_converged},
            {"outer_converged", d.outer_converged},
            {"max_penalized_gradient", d.max_penalized_gradient},
            {"covariance_pseudo_inverse", d.covariance_pseudo_inverse},
            {"notes", d.notes}}},
          {"loglik", m.loglik},
          {"penalized_loglik", m.penalized_loglik},
          {"n", m.n},
          {"q", m.q},
          {"training_x", std::move(training)}};
}

FittedModel model_from_json(const json& j) {
  FittedModel m;
  m.spec = DesignSpec::parse(j.at("formula").get<std::string>());
  m.link = json_link(j.at("link"));
  for (const auto& jt : j.at("terms")) {
    DesignTerm t;
    t.name = jt.at("name").get<std::string>();
    const auto kind = jt.at("kind").get<std::string>();
    if (kind != "smooth" && kind != "parametric") throw FormatError("unknown term kind '" + kind + "'");
    t.kind = kind == "smooth" ? TermKind::smooth : TermKind::parametric;
    t.span.start = jt.at("span").at(0).get<Eigen::Index>();
    t.span.size = jt.at("span").at(1).get<Eigen::Index>();
    t.null_dim = jt.at("null_dim").get<int>();
    if (t.kind == TermKind::smooth) {
      t.basis = json_basis(jt.at("basis"));
      t.penalty = json_mat(jt.at("penalty"));
    }
    m.terms.push_back(std::move(t));
  }
  m.delta = json_vec(j.at("delta"));
  m.covariance = json_mat(j.at("covariance"));
  m.hessian = json_mat(j.at("hessian"));
  const auto& s = j.at("smoothing");
  m.smoothing.lambdas = json_vec(s.at("lambdas"));
  m.smoothing.edf_total = s.at("edf_total").get<double>();
  m.smoothing.edf_per_term = s.at("edf_per_term").get<std::vector<double>>();
  m.smoothing.ubre = s.at("ubre").get<double>();
  m.converged = j.at("converged").get<bool>();
  const auto& d = j.at("diagnostics");
  m.diagnostics.outer_iterations = d.at("outer_iterations").get<int>();
  m.diagnostics.inner_iterations = d.at("inner_iterations").get<int>();
  m.diagnostics.levenberg_shifts = d.at("levenberg_shifts").get<int>();
  m.diagnostics.rejected_steps = d.at("rejected_steps").get<int>();
  m.diagnostics.inner_converged = d.at("inner_converged").get<bool>();
  m.diagnostics.outer_converged = d.at("outer_converged").get<bool>();
  m.diagnostics.max_penalized_gradient = d.at("max_penalized_gradient").get<double>();
  m.diagnostics.covariance_pseudo_inverse = d.at("covariance_pseudo_inverse").get<bool>();
  m.diagnostics.notes = d.at("notes").get<std::vector<std::string>>();
  m.loglik = j.at("loglik").get<double>();
  m.penalized_loglik = j.at("penalized_loglik").get<double>();
  m.n = j.at("n").get<std::size_t>();
  m.q = j.at("q").get<std::size_t>();
  for (const auto& [name, x] : j.at("training_x").items()) m.training_x[name] = json_vec(x);

  const auto q = static_cast<Eigen::Index>(m.q);
  if (m.delta.size() != q || m.covariance.rows() != q || m.covariance.cols() != q)
    throw FormatError("archive coefficient and covariance shapes disagree");
  Eigen::Index covered = 0;
  for (const auto& t : m.terms) covered += t.span.size;
  if (covered != q) throw FormatError("archive term spans do not cover the coefficient vector");
  if (static_cast<std::size_t>(m.smoothing.lambdas.size()) != m.smooth_terms().size())
    throw FormatError("archive smoothing parameters do not match the smooth terms");
  return m;
}

json archive_to_json(const ModelArchive& archive) {
  return {{"format", "bgeva-model"},
          {"format_version", kArchiveFormatVersion},
          {"model", model_to_json(archive.model)},
          {"provenance",
           {{"data_hash", archive.provenance.data_hash},
            {"seed", archive.provenance.seed},
            {"config", archive.provenance.config},
            {"command", archive.provenance.command}}}};
}

ModelArchive archive_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != "bgeva-model")
    throw FormatError("not a model archive (missing format tag)");
  const int version = j.at("format_version").get<int>();
  if (version > kArchiveFormatVersion) {
    std::ostringstream msg;
    msg << "archive format version " << version << " is newer than the supported version " << kArchiveFormatVersion;
    throw FormatError(msg.str());
  }
  if (version < 1) throw FormatError("invalid archive format version");
  ModelArchive a;
  a.model = model_from_json(j.at("model"));
  const auto& p = j.at("provenance");
  a.provenance.data_hash = p.at("data_hash").get<std::string>();
  a.provenance.seed = p.at("seed").get<std::uint64_t>();
  a.provenance.config = p.at("config");
  a.provenance.command = p.value("command", std::string{});
  return a;
}

void save_archive(const std::string& path, const ModelArchive& archive) {
  const std::string text = archive_to_json(archive).dump(1) + "\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write archive '" + path + "'");
  out << text;
  if (!out) throw FormatError("write failed for archive '" + path + "'");
}

ModelArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open archive '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw FormatError("corrupt archive '" + path + "': " + e.what());
  }
  try {
    return archive_from_json(j);
  } catch (const json::exception& e) {
    throw FormatError("corrupt archive '" + path + "': " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("corrupt archive '" + path + "': " + e.what());
  }
}

}  // namespace bgeva
