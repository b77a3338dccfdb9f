#include "levyhom/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "levyhom/errors.hpp"
#include "levyhom/fields.hpp"
#include "levyhom/kernels.hpp"
#include "levyhom/matrix_io.hpp"

namespace levyhom {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.28318530717958647692;

std::string dotted(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError("config key " + (where.empty() ? std::string("<root>") : where) +
                      " must be an object");
  }
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown config key " + dotted(where, item.key()));
  }
}

bool has_key(const json& j, const char* key) { return j.contains(key); }

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError("missing required config key " + dotted(where, key));
  }
  return j.at(key);
}

json& need(json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError("missing required config key " + dotted(where, key));
  }
  return j.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("config key " + path + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) {
    throw ConfigError("config key " + path + " must be an integer");
  }
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("config key " + path + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError("config key " + path + " must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, path));
  return out;
}

double number_or(const json& j, const std::string& where, const char* key, double dflt) {
  return j.contains(key) ? as_number(j.at(key), dotted(where, key)) : dflt;
}

int int_or(const json& j, const std::string& where, const char* key, int dflt) {
  return j.contains(key) ? as_int(j.at(key), dotted(where, key)) : dflt;
}

// Paths are resolved against the directory holding the config file; the
// resolved form is written back so the echoed document is self-contained.
std::string resolve_path(json& owner, const std::string& where, const char* key,
                         const std::string& dir) {
  const std::string raw = as_string(owner.at(key), dotted(where, key));
  if (raw.empty()) throw ConfigError("config key " + dotted(where, key) + " is empty");
  std::filesystem::path p(raw);
  if (p.is_relative() && !dir.empty()) p = std::filesystem::path(dir) / p;
  owner[key] = p.lexically_normal().string();
  return owner.at(key).get<std::string>();
}

TorusField parse_torus_field(json& spec, const std::string& where, int dim,
                             const std::string& dir) {
  expect_object(spec, where);
  check_keys(spec, where, {"values", "file", "n"});
  if (has_key(spec, "file")) {
    return load_torus_field(resolve_path(spec, where, "file", dir), dim);
  }
  const json& values = need(spec, where, "values");
  const std::string vpath = dotted(where, "values");
  if (dim == 1) {
    return make_torus_field(1, static_cast<int>(values.size()),
                            as_number_list(values, vpath));
  }
  if (!values.is_array() || values.empty() || !values.front().is_array()) {
    throw ConfigError("config key " + vpath + " must be an array of rows in d=2");
  }
  const int n = static_cast<int>(values.size());
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(n) * n);
  for (const auto& row : values) {
    const std::vector<double> r = as_number_list(row, vpath);
    if (static_cast<int>(r.size()) != n) {
      throw ConfigError("config key " + vpath + " must be square");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return make_torus_field(2, n, std::move(flat));
}

RandomFieldSpec parse_random_field(json& spec, const std::string& where,
                                   uint64_t default_stream) {
  expect_object(spec, where);
  check_keys(spec, where, {"kind", "states", "cell_size", "stream", "direction"});
  RandomFieldSpec out;
  const std::string kind =
      spec.contains("kind") ? as_string(spec.at("kind"), dotted(where, "kind"))
                            : std::string("checkerboard");
  if (kind == "checkerboard") {
    out.kind = FieldKind::Checkerboard;
  } else if (kind == "rotation") {
    out.kind = FieldKind::Rotation;
  } else {
    throw ConfigError("config key " + dotted(where, "kind") +
                      " must be checkerboard or rotation");
  }
  out.states = as_number_list(need(spec, where, "states"), dotted(where, "states"));
  out.cell_size = number_or(spec, where, "cell_size", 1.0);
  out.stream = static_cast<uint64_t>(int_or(spec, where, "stream",
                                            static_cast<int>(default_stream)));
  if (has_key(spec, "direction")) {
    out.direction = as_number_list(spec.at("direction"), dotted(where, "direction"));
  }
  spec["kind"] = kind;
  spec["cell_size"] = out.cell_size;
  spec["stream"] = out.stream;
  return out;
}

MacroRule parse_macro_rule(json& spec, const std::string& where) {
  expect_object(spec, where);
  check_keys(spec, where, {"rule", "base", "amplitude"});
  MacroRule out;
  const std::string rule = as_string(need(spec, where, "rule"), dotted(where, "rule"));
  if (rule == "one") {
    out.kind = MacroRule::Kind::One;
  } else if (rule == "constant") {
    out.kind = MacroRule::Kind::Constant;
  } else if (rule == "expdist") {
    out.kind = MacroRule::Kind::ExpDist;
  } else {
    throw ConfigError("config key " + dotted(where, "rule") +
                      " must be one, constant or expdist");
  }
  out.base = number_or(spec, where, "base", 1.0);
  out.amplitude = number_or(spec, where, "amplitude", 0.0);
  spec["base"] = out.base;
  spec["amplitude"] = out.amplitude;
  return out;
}

OmegaRule parse_omega_rule(json& spec, const std::string& where) {
  expect_object(spec, where);
  check_keys(spec, where, {"rule", "base", "amplitude"});
  OmegaRule out;
  const std::string rule = as_string(need(spec, where, "rule"), dotted(where, "rule"));
  if (rule == "constant") {
    out.kind = OmegaRule::Kind::Constant;
  } else if (rule == "product_cos") {
    out.kind = OmegaRule::Kind::ProductCos;
  } else if (rule == "sin_cross") {
    out.kind = OmegaRule::Kind::SinCross;
  } else {
    throw ConfigError("config key " + dotted(where, "rule") +
                      " must be constant, product_cos or sin_cross");
  }
  out.base = number_or(spec, where, "base", 1.0);
  out.amplitude = number_or(spec, where, "amplitude", 0.0);
  spec["base"] = out.base;
  spec["amplitude"] = out.amplitude;
  return out;
}

KernelTable parse_kernel_table(json& spec, const std::string& where, int dim,
                               const std::string& dir) {
  expect_object(spec, where);
  check_keys(spec, where, {"file", "values", "n", "rule", "base", "amp_zeta", "amp_eta"});
  if (has_key(spec, "file")) {
    return load_kernel_table(resolve_path(spec, where, "file", dir), dim);
  }
  if (has_key(spec, "values")) {
    const json& values = spec.at("values");
    const std::string vpath = dotted(where, "values");
    if (!values.is_array() || values.empty() || !values.front().is_array()) {
      throw ConfigError("config key " + vpath + " must be an array of rows");
    }
    const int size = static_cast<int>(values.size());
    int n = size;
    if (dim == 2) {
      n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(size))));
      if (n * n != size) {
        throw ConfigError("config key " + vpath + " must have n^2 rows in d=2");
      }
    }
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(size) * size);
    for (const auto& row : values) {
      const std::vector<double> r = as_number_list(row, vpath);
      if (static_cast<int>(r.size()) != size) {
        throw ConfigError("config key " + vpath + " must be square");
      }
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return make_kernel_table(dim, n, std::move(flat));
  }
  const std::string rule = as_string(need(spec, where, "rule"), dotted(where, "rule"));
  const int n = as_int(need(spec, where, "n"), dotted(where, "n"));
  const double base = number_or(spec, where, "base", 1.0);
  spec["base"] = base;
  if (rule == "constant") {
    return make_kernel_table(dim, n, [base](const Pt&, const Pt&) { return base; });
  }
  if (rule == "sin_pair") {
    if (dim != 1) {
      throw ConfigError("config key " + dotted(where, "rule") +
                        ": sin_pair tables are one-dimensional");
    }
    const double az = number_or(spec, where, "amp_zeta", 0.0);
    const double ae = number_or(spec, where, "amp_eta", 0.0);
    spec["amp_zeta"] = az;
    spec["amp_eta"] = ae;
    return make_kernel_table(1, n, [base, az, ae](const Pt& zeta, const Pt& eta) {
      return base + az * std::sin(kTwoPi * zeta[0]) + ae * std::sin(kTwoPi * eta[0]);
    });
  }
  throw ConfigError("config key " + dotted(where, "rule") +
                    " must be constant or sin_pair");
}

std::function<double(const Pt&)> source_from_matrix(const std::string& path, int dim,
                                                    double r_dom) {
  const Matrix mat = read_matrix(path);
  if (dim == 1 && mat.rows != 1) {
    throw ConfigError("source file " + path + " must have one row in d=1");
  }
  if (dim == 2 && mat.rows != mat.cols) {
    throw ConfigError("source file " + path + " must be square in d=2");
  }
  const int m = mat.cols;
  return [mat, dim, r_dom, m](const Pt& x) {
    const double h = 2.0 * r_dom / m;
    const auto idx = [&](double c) {
      const int i = static_cast<int>(std::floor((c + r_dom) / h));
      return std::clamp(i, 0, m - 1);
    };
    return dim == 1 ? mat.at(0, idx(x[0])) : mat.at(idx(x[0]), idx(x[1]));
  };
}

std::function<double(const Pt&)> parse_source(json& doc, int dim, double r_dom,
                                              const std::string& dir) {
  if (!doc.contains("f")) {
    doc["f"] = json{{"bump", json{{"radius", 1.0}, {"height", 1.0}}}};
    return bump_source(dim);
  }
  json& spec = doc.at("f");
  expect_object(spec, "f");
  check_keys(spec, "f", {"bump", "file"});
  if (has_key(spec, "file")) {
    return source_from_matrix(resolve_path(spec, "f", "file", dir), dim, r_dom);
  }
  json& bump = need(spec, "f", "bump");
  expect_object(bump, "f.bump");
  check_keys(bump, "f.bump", {"radius", "height"});
  const double radius = number_or(bump, "f.bump", "radius", 1.0);
  const double height = number_or(bump, "f.bump", "height", 1.0);
  if (!(radius > 0.0)) throw ConfigError("config key f.bump.radius must be positive");
  bump["radius"] = radius;
  bump["height"] = height;
  return bump_source(dim, radius, height);
}

Box parse_box(const json& spec, int dim) {
  expect_object(spec, "box");
  check_keys(spec, "box", {"lo", "hi"});
  const std::vector<double> lo = as_number_list(need(spec, "box", "lo"), "box.lo");
  const std::vector<double> hi = as_number_list(need(spec, "box", "hi"), "box.hi");
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
    throw ConfigError("config keys box.lo and box.hi must have one entry per axis");
  }
  Box b;
  b.dim = dim;
  for (int k = 0; k < dim; ++k) {
    b.lo[k] = lo[k];
    b.hi[k] = hi[k];
  }
  return b;
}

KernelModel parse_model(json& doc, const std::string& tag, int dim, double alpha,
                        double gamma, const std::string& dir) {
  if (tag == "p1") {
    TorusField lambda = parse_torus_field(need(doc, "", "lambda"), "lambda", dim, dir);
    TorusField mu = parse_torus_field(need(doc, "", "mu"), "mu", dim, dir);
    return make_p1_model(dim, alpha, gamma, std::move(lambda), std::move(mu));
  }
  if (tag == "p2") {
    MacroRule a = parse_macro_rule(need(doc, "", "macro"), "macro");
    KernelTable lper = parse_kernel_table(need(doc, "", "table"), "table", dim, dir);
    return make_p2_model(dim, alpha, gamma, a, std::move(lper));
  }
  if (tag == "q1") {
    RandomFieldSpec lambda = parse_random_field(need(doc, "", "lambda"), "lambda", 0);
    RandomFieldSpec mu = parse_random_field(need(doc, "", "mu"), "mu", 1);
    return make_q1_model(dim, alpha, gamma, std::move(lambda), std::move(mu));
  }
  if (tag == "q2") {
    OmegaRule rule = parse_omega_rule(need(doc, "", "omega"), "omega");
    std::vector<double> direction;
    if (has_key(doc, "direction")) {
      direction = as_number_list(doc.at("direction"), "direction");
    }
    return make_q2_model(dim, alpha, gamma, rule, std::move(direction));
  }
  if (tag == "nonsym") {
    KernelTable lper = parse_kernel_table(need(doc, "", "table"), "table", dim, dir);
    const double bound = number_or(doc, "", "lipschitz_bound", 0.0);
    return make_nonsym_model(dim, alpha, gamma, std::move(lper), bound);
  }
  throw ConfigError("config key case must be one of p1, p2, q1, q2, nonsym");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_object(doc, "");
  check_keys(doc, "",
             {"case", "dim", "alpha", "gamma", "m", "p", "f", "r_dom", "refine",
              "r_near", "eps", "seeds", "seed", "tol", "max_iterations",
              "kernel_override", "out", "box", "lambda", "mu", "macro", "omega",
              "table", "direction", "lipschitz_bound", "table_n", "r_img",
              "lambda_shift"});

  RunConfig rc;
  rc.case_tag = as_string(need(doc, "", "case"), "case");
  const int dim = int_or(doc, "", "dim", 1);
  const double alpha = as_number(need(doc, "", "alpha"), "alpha");
  const double gamma = as_number(need(doc, "", "gamma"), "gamma");
  doc["dim"] = dim;

  rc.sweep.model = parse_model(doc, rc.case_tag, dim, alpha, gamma, dir);
  rc.sweep.m = number_or(doc, "", "m", 1.0);
  rc.sweep.p = number_or(doc, "", "p", 2.0);
  rc.sweep.r_dom = number_or(doc, "", "r_dom", 2.0);
  rc.sweep.refine = int_or(doc, "", "refine", 8);
  rc.sweep.r_near = number_or(doc, "", "r_near", 0.0);
  rc.sweep.tol = number_or(doc, "", "tol", 0.0);
  rc.sweep.max_iterations = int_or(doc, "", "max_iterations", 0);
  rc.sweep.kernel_override = number_or(doc, "", "kernel_override", 0.0);
  doc["m"] = rc.sweep.m;
  doc["p"] = rc.sweep.p;
  doc["r_dom"] = rc.sweep.r_dom;
  doc["refine"] = rc.sweep.refine;
  doc["tol"] = rc.sweep.tol;

  if (has_key(doc, "eps")) {
    const json& eps = doc.at("eps");
    rc.sweep.eps_list = eps.is_number() ? std::vector<double>{eps.get<double>()}
                                        : as_number_list(eps, "eps");
    doc["eps"] = rc.sweep.eps_list;
  }
  if (has_key(doc, "seeds")) {
    for (const double s : as_number_list(doc.at("seeds"), "seeds")) {
      if (s < 0.0 || s != std::floor(s)) {
        throw ConfigError("config key seeds must hold nonnegative integers");
      }
      rc.sweep.seeds.push_back(static_cast<uint64_t>(s));
    }
  }
  if (has_key(doc, "seed")) {
    const int s = as_int(doc.at("seed"), "seed");
    if (s < 0) throw ConfigError("config key seed must be nonnegative");
    rc.seed = static_cast<uint64_t>(s);
  }
  doc["seed"] = rc.seed;

  rc.sweep.f = parse_source(doc, dim, rc.sweep.r_dom, dir);

  if (has_key(doc, "box")) {
    rc.box = parse_box(doc.at("box"), dim);
    rc.has_box = true;
  }
  rc.table_n = int_or(doc, "", "table_n", 0);
  rc.r_img = int_or(doc, "", "r_img", 8);
  rc.lambda_shift = number_or(doc, "", "lambda_shift", 0.0);
  if (has_key(doc, "out")) rc.out = as_string(doc.at("out"), "out");
  doc["out"] = rc.out;
  doc["r_near"] = rc.sweep.r_near;
  doc["max_iterations"] = rc.sweep.max_iterations;
  doc["kernel_override"] = rc.sweep.kernel_override;
  doc["table_n"] = rc.table_n;
  doc["r_img"] = rc.r_img;
  doc["lambda_shift"] = rc.lambda_shift;
  if (rc.sweep.model.is_random() && rc.sweep.seeds.empty()) {
    doc["seeds"] = std::vector<uint64_t>{0};
  }

  rc.echo = doc.dump(2);
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(),
                          std::filesystem::path(path).parent_path().string());
}

}  // namespace levyhom
