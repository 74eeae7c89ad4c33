#include "cox/json_io.hpp"

#include <filesystem>
#include <fstream>

#ifndef COX_VERSION
#define COX_VERSION "unversioned"
#endif

namespace cox {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

Index get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "must be an integer");
  return static_cast<Index>(j.get<std::int64_t>());
}

Vector get_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a nonempty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "must be a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

nlohmann::json to_json(const ModelSpec& spec) {
  json j;
  j["beta0"] = to_std(spec.beta0);

  if (const auto* e = std::get_if<ExponentialHazard>(&spec.baseline)) {
    j["baseline"] = {{"family", "exponential"}, {"rate", e->rate}};
  } else {
    const auto& w = std::get<WeibullHazard>(spec.baseline);
    j["baseline"] = {{"family", "weibull"}, {"scale", w.scale}, {"shape", w.shape}};
  }

  if (const auto* fd = std::get_if<FiniteDiscreteCovariates>(&spec.covariates)) {
    json atoms = json::array();
    for (Index r = 0; r < fd->atoms.rows(); ++r)
      atoms.push_back(to_std(fd->atoms.row(r).transpose()));
    j["covariates"] = {{"law", "finite-discrete"},
                       {"atoms", std::move(atoms)},
                       {"probs", to_std(fd->probs)}};
  } else {
    const auto& box = std::get<UniformBoxCovariates>(spec.covariates);
    j["covariates"] = {{"law", "uniform-box"},
                       {"lower", to_std(box.lower)},
                       {"upper", to_std(box.upper)}};
  }

  if (spec.censoring.rate > 0.0) {
    j["censoring"] = {{"law", "exponential"},
                      {"rate", spec.censoring.rate},
                      {"study_end", spec.censoring.study_end}};
  } else {
    j["censoring"] = {{"law", "none"}, {"study_end", spec.censoring.study_end}};
  }
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.beta0 = get_vector(field(j, "beta0", "spec"), "beta0");

  {
    const json& b = field(j, "baseline", "spec");
    const json& fam = field(b, "family", "baseline");
    if (!fam.is_string()) fail("baseline.family", "must be a string");
    const std::string family = fam.get<std::string>();
    if (family == "exponential") {
      spec.baseline = ExponentialHazard{get_number(field(b, "rate", "baseline"), "baseline.rate")};
    } else if (family == "weibull") {
      spec.baseline = WeibullHazard{get_number(field(b, "scale", "baseline"), "baseline.scale"),
                                    get_number(field(b, "shape", "baseline"), "baseline.shape")};
    } else {
      fail("baseline.family", "must be \"exponential\" or \"weibull\"");
    }
  }

  {
    const json& c = field(j, "covariates", "spec");
    const json& lawj = field(c, "law", "covariates");
    if (!lawj.is_string()) fail("covariates.law", "must be a string");
    const std::string law = lawj.get<std::string>();
    if (law == "finite-discrete") {
      const json& atoms = field(c, "atoms", "covariates");
      if (!atoms.is_array() || atoms.empty())
        fail("covariates.atoms", "must be a nonempty array of rows");
      FiniteDiscreteCovariates fd;
      const Index rows = static_cast<Index>(atoms.size());
      for (Index r = 0; r < rows; ++r) {
        const Vector row = get_vector(atoms[static_cast<std::size_t>(r)],
                                      "covariates.atoms[" + std::to_string(r) + "]");
        if (r == 0) fd.atoms.resize(rows, row.size());
        if (row.size() != fd.atoms.cols())
          fail("covariates.atoms[" + std::to_string(r) + "]", "inconsistent row length");
        fd.atoms.row(r) = row.transpose();
      }
      fd.probs = get_vector(field(c, "probs", "covariates"), "covariates.probs");
      spec.covariates = std::move(fd);
    } else if (law == "uniform-box") {
      UniformBoxCovariates box;
      box.lower = get_vector(field(c, "lower", "covariates"), "covariates.lower");
      box.upper = get_vector(field(c, "upper", "covariates"), "covariates.upper");
      spec.covariates = std::move(box);
    } else {
      fail("covariates.law", "must be \"finite-discrete\" or \"uniform-box\"");
    }
  }

  {
    const json& c = field(j, "censoring", "spec");
    const json& lawj = field(c, "law", "censoring");
    if (!lawj.is_string()) fail("censoring.law", "must be a string");
    const std::string law = lawj.get<std::string>();
    if (law == "none") {
      spec.censoring.rate = 0.0;
    } else if (law == "exponential") {
      spec.censoring.rate = get_number(field(c, "rate", "censoring"), "censoring.rate");
    } else {
      fail("censoring.law", "must be \"none\" or \"exponential\"");
    }
    spec.censoring.study_end =
        get_number(field(c, "study_end", "censoring"), "censoring.study_end");
  }

  spec.validate();
  return spec;
}

nlohmann::json to_json(const FitResult& fit) {
  json j;
  j["beta_hat"] = to_std(fit.beta_hat);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["score_norm"] = fit.score_norm;
  j["log_likelihood"] = fit.log_likelihood;
  std::vector<double> info;
  info.reserve(static_cast<std::size_t>(fit.information.size()));
  for (Index r = 0; r < fit.information.rows(); ++r)
    for (Index c = 0; c < fit.information.cols(); ++c) info.push_back(fit.information(r, c));
  j["information"] = std::move(info);
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult fit;
  fit.beta_hat = get_vector(field(j, "beta_hat", "fit"), "beta_hat");
  const json& conv = field(j, "converged", "fit");
  if (!conv.is_boolean()) fail("converged", "must be a boolean");
  fit.converged = conv.get<bool>();
  fit.iterations = static_cast<int>(get_count(field(j, "iterations", "fit"), "iterations"));
  fit.score_norm = get_number(field(j, "score_norm", "fit"), "score_norm");
  fit.log_likelihood = get_number(field(j, "log_likelihood", "fit"), "log_likelihood");
  const Index d = fit.beta_hat.size();
  const json& info = field(j, "information", "fit");
  if (!info.is_array() || static_cast<Index>(info.size()) != d * d)
    fail("information", "must be a row-major array of length d*d");
  fit.information.resize(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) {
      const json& cell = info[static_cast<std::size_t>(r * d + c)];
      if (!cell.is_number())
        fail("information[" + std::to_string(r * d + c) + "]", "must be a number");
      fit.information(r, c) = cell.get<double>();
    }
  return fit;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j;
  j["spec"] = to_json(cfg.spec);
  j["n_grid"] = [&] {
    std::vector<long long> v;
    for (Index n : cfg.n_grid) v.push_back(static_cast<long long>(n));
    return v;
  }();
  j["p_list"] = cfg.p_list;
  j["replications"] = static_cast<long long>(cfg.replications);
  j["master_seed"] = cfg.master_seed;
  j["epsilon"] = cfg.epsilon;
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.spec = model_spec_from_json(field(j, "spec", "config"));

  const json& grid = field(j, "n_grid", "config");
  if (!grid.is_array() || grid.empty()) fail("n_grid", "must be a nonempty integer array");
  for (std::size_t i = 0; i < grid.size(); ++i)
    cfg.n_grid.push_back(get_count(grid[i], "n_grid[" + std::to_string(i) + "]"));

  if (j.contains("p_list")) {
    const json& ps = j["p_list"];
    if (!ps.is_array()) fail("p_list", "must be an array of numbers");
    for (std::size_t i = 0; i < ps.size(); ++i)
      cfg.p_list.push_back(get_number(ps[i], "p_list[" + std::to_string(i) + "]"));
  }

  cfg.replications = get_count(field(j, "replications", "config"), "replications");
  cfg.master_seed = get_u64(field(j, "master_seed", "config"), "master_seed");
  if (j.contains("epsilon")) cfg.epsilon = get_number(j["epsilon"], "epsilon");
  cfg.validate();
  return cfg;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_run_manifest(const ExperimentConfig& cfg, const std::string& run_name,
                        const std::string& out_dir,
                        const std::vector<std::string>& outputs) {
  json m;
  m["run"] = run_name;
  m["config"] = to_json(cfg);
  m["master_seed"] = cfg.master_seed;
  m["workers"] = cfg.workers;
  m["code_version"] = COX_VERSION;
  m["outputs"] = outputs;
  const auto path = std::filesystem::path(out_dir) / (run_name + "_manifest.json");
  write_json_file(m, path.string());
}

}  // namespace cox
