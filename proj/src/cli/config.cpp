#include "quadlik/cli/config.hpp"

#include "quadlik/lamn.hpp"
#include "quadlik/models.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace quadlik::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  throw InputError("config " + where + ": " + msg);
}

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) bad(where, "unknown key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) bad(where, "missing required key '" + key + "'");
  }
}

double get_real(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

int get_positive_int(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1'000'000'000)
    bad(where, "expected a positive integer");
  return v.get<int>();
}

Vector get_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a nonempty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = get_real(v[i], where);
  return out;
}

Matrix get_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a nonempty array of rows");
  const auto rows = v.size();
  const auto cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector row = get_vector(v[i], where);
    if (static_cast<std::size_t>(row.size()) != cols) bad(where, "ragged matrix");
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

std::filesystem::path resolve(const json& v, const std::string& where,
                              const std::filesystem::path& base_dir) {
  if (!v.is_string() || v.get<std::string>().empty()) bad(where, "expected a path string");
  std::filesystem::path p = v.get<std::string>();
  return p.is_absolute() ? p : base_dir / p;
}

ModelConfig parse_model(const json& m, const std::filesystem::path& base_dir) {
  if (!m.is_object() || !m.contains("type") || !m["type"].is_string())
    bad("model", "expected an object with a string 'type'");
  ModelConfig out;
  out.type = m["type"].get<std::string>();
  if (out.type == "lan") {
    require_keys(m, "model", {"type", "K"}, {"K"});
    out.k = get_matrix(m["K"], "model.K");
  } else if (out.type == "wishart-lamn") {
    require_keys(m, "model", {"type", "dof", "scale"}, {"dof", "scale"});
    out.dof = get_real(m["dof"], "model.dof");
    out.scale = get_matrix(m["scale"], "model.scale");
  } else if (out.type == "ar1") {
    require_keys(m, "model", {"type", "n", "x0", "random_x0"}, {"n"});
    out.n = get_positive_int(m["n"], "model.n");
    if (m.contains("x0")) out.x0 = get_real(m["x0"], "model.x0");
    if (m.contains("random_x0")) {
      if (!m["random_x0"].is_boolean()) bad("model.random_x0", "expected a boolean");
      out.random_x0 = m["random_x0"].get<bool>();
    }
  } else if (out.type == "animal") {
    require_keys(m, "model", {"type", "pedigree", "synthetic_size", "pedigree_seed"});
    if (m.contains("pedigree") == m.contains("synthetic_size"))
      bad("model", "animal model needs exactly one of 'pedigree' or 'synthetic_size'");
    if (m.contains("pedigree")) out.pedigree = resolve(m["pedigree"], "model.pedigree", base_dir);
    if (m.contains("synthetic_size"))
      out.synthetic_size = get_positive_int(m["synthetic_size"], "model.synthetic_size");
    if (m.contains("pedigree_seed")) {
      if (!m["pedigree_seed"].is_number_unsigned()) bad("model.pedigree_seed", "expected an unsigned integer");
      out.pedigree_seed = m["pedigree_seed"].get<std::uint64_t>();
    }
  } else if (out.type == "exponential") {
    require_keys(m, "model", {"type", "n"}, {"n"});
    out.n = get_positive_int(m["n"], "model.n");
  } else {
    bad("model.type", "unknown model type '" + out.type + "'");
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(doc, "root",
               {"schema_version", "experiment", "seed", "model", "data", "theta", "theta_b",
                "perturbation", "deltas", "alpha", "replications", "nsim", "bootstrap", "box",
                "n_ladder", "unit", "tau"},
               {"schema_version", "experiment", "seed", "model"});
  if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kSchemaVersion)
    bad("schema_version", "expected " + std::to_string(kSchemaVersion));

  ExperimentConfig c;
  if (!doc["experiment"].is_string()) bad("experiment", "expected a string");
  c.experiment = doc["experiment"].get<std::string>();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    bad("experiment", "unknown experiment '" + c.experiment + "'");
  if (!doc["seed"].is_number_unsigned()) bad("seed", "expected an unsigned integer");
  c.seed = doc["seed"].get<std::uint64_t>();
  c.model = parse_model(doc["model"], base_dir);

  if (doc.contains("data")) c.data = resolve(doc["data"], "data", base_dir);
  if (doc.contains("theta")) c.theta = get_vector(doc["theta"], "theta");
  if (doc.contains("theta_b")) c.theta_b = get_vector(doc["theta_b"], "theta_b");
  if (doc.contains("perturbation")) c.perturbation = get_vector(doc["perturbation"], "perturbation");
  if (doc.contains("deltas")) {
    if (!doc["deltas"].is_array() || doc["deltas"].empty()) bad("deltas", "expected a nonempty array");
    for (const auto& d : doc["deltas"]) c.deltas.push_back(get_vector(d, "deltas"));
  }
  if (doc.contains("alpha")) {
    c.alpha = get_real(doc["alpha"], "alpha");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad("alpha", "must lie in (0, 1)");
  }
  if (doc.contains("replications")) c.replications = get_positive_int(doc["replications"], "replications");
  if (doc.contains("nsim")) {
    c.nsim = get_positive_int(doc["nsim"], "nsim");
    if (c.nsim < 2) bad("nsim", "must be at least 2");
  }
  if (doc.contains("bootstrap")) {
    const auto& b = doc["bootstrap"];
    require_keys(b, "bootstrap", {"B", "B2", "level"});
    c.bootstrap.present = true;
    if (b.contains("B")) c.bootstrap.B = get_positive_int(b["B"], "bootstrap.B");
    if (b.contains("B2")) c.bootstrap.B2 = get_positive_int(b["B2"], "bootstrap.B2");
    if (b.contains("level")) {
      c.bootstrap.level = get_real(b["level"], "bootstrap.level");
      if (!(*c.bootstrap.level > 0.0 && *c.bootstrap.level < 1.0)) bad("bootstrap.level", "must lie in (0, 1)");
    }
  }
  if (doc.contains("box")) {
    const auto& b = doc["box"];
    require_keys(b, "box", {"half_width", "points_per_axis"});
    if (b.contains("half_width")) {
      c.box.half_width = get_vector(b["half_width"], "box.half_width");
      if ((c.box.half_width->array() <= 0.0).any()) bad("box.half_width", "must be positive");
    }
    if (b.contains("points_per_axis"))
      c.box.points_per_axis = get_positive_int(b["points_per_axis"], "box.points_per_axis");
  }
  if (doc.contains("n_ladder")) {
    const auto& l = doc["n_ladder"];
    if (!l.is_array() || l.empty()) bad("n_ladder", "expected a nonempty array");
    c.n_ladder.clear();
    for (const auto& v : l) c.n_ladder.push_back(get_positive_int(v, "n_ladder"));
  }
  if (doc.contains("unit")) {
    if (!doc["unit"].is_string()) bad("unit", "expected a string");
    c.unit = doc["unit"].get<std::string>();
    if (c.unit != "normal" && c.unit != "exponential") bad("unit", "expected 'normal' or 'exponential'");
  }
  if (doc.contains("tau")) {
    if (!doc["tau"].is_string()) bad("tau", "expected a string");
    c.tau = doc["tau"].get<std::string>();
    if (c.tau != "sqrt_n" && c.tau != "one") bad("tau", "expected 'sqrt_n' or 'one'");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::shared_ptr<const LikModel> build_model(const ModelConfig& m) {
  try {
    if (m.type == "lan") return std::make_shared<LanNormalLocation>(m.k);
    if (m.type == "wishart-lamn") {
      const int p = static_cast<int>(m.scale.rows());
      return std::make_shared<WishartLamnModel>(LamnSpec(p, WishartCurvature{m.dof, m.scale}));
    }
    if (m.type == "ar1") return std::make_shared<Ar1Model>(m.n, m.x0, m.random_x0);
    if (m.type == "exponential") return std::make_shared<ExponentialRateModel>(m.n);
    if (m.type == "animal") {
      const Pedigree ped = m.pedigree ? Pedigree::load_csv(m.pedigree->string())
                                      : Pedigree::synthetic(m.synthetic_size, m.pedigree_seed);
      return std::make_shared<AnimalModel>(relationship_matrix(ped));
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  throw InputError("unknown model type " + m.type);
}

Vector parse_column_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    line.erase(0, line.find_first_not_of(" \t\r"));
    const auto end = line.find_last_not_of(" \t\r");
    line.erase(end == std::string::npos ? 0 : end + 1);
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    bool ok = true;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || used != line.size()) {
      if (first && line.find(',') == std::string::npos) {
        first = false;
        continue;  // header
      }
      throw InputError("data line " + std::to_string(line_no) + ": expected one real, got '" + line + "'");
    }
    first = false;
    values.push_back(v);
  }
  if (values.empty()) throw InputError("data file holds no values");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector load_column_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_column_csv(buf.str());
}

}  // namespace quadlik::cli
