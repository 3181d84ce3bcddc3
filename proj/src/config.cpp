#include "mlac/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mlac/errors.hpp"
#include "mlac/scales.hpp"

namespace mlac {

using nlohmann::json;

namespace {

struct Reader {
  bool strict;
  std::vector<std::string>& warnings;

  void check_keys(const json& obj, const std::string& path, std::set<std::string> known) const {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
      if (known.count(key)) continue;
      const std::string where = path.empty() ? key : path + "." + key;
      if (strict) throw ConfigError(where + ": unknown key");
      warnings.push_back("unknown key " + where + " ignored");
    }
  }

  static double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
    return x;
  }

  static int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<int>();
  }

  static std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
};

void check_epsilon(double e, const std::string& path) {
  if (!(e > 0.0 && e < kEpsilonMax)) throw ConfigError(path + ": must lie in (0, 0.2)");
}

CurvatureSpec parse_curvature(const json& c, const Reader& rd) {
  const std::string path = "geometry.curvature";
  if (!c.is_object() || !c.contains("type") || !c["type"].is_string())
    throw ConfigError(path + ": expected an object with a string \"type\"");
  const std::string type = c["type"].get<std::string>();
  if (type == "constant") {
    rd.check_keys(c, path, {"type", "value"});
    if (!c.contains("value")) throw ConfigError(path + ".value: required for constant curvature");
    return ConstantCurvature{Reader::number(c["value"], path + ".value")};
  }
  if (type == "fourier") {
    rd.check_keys(c, path, {"type", "mean", "cos", "sin"});
    if (!c.contains("mean")) throw ConfigError(path + ".mean: required for fourier curvature");
    FourierCurvature f{Reader::number(c["mean"], path + ".mean"), {}, {}};
    if (c.contains("cos")) f.cos_coefficients = Reader::numbers(c["cos"], path + ".cos");
    if (c.contains("sin")) f.sin_coefficients = Reader::numbers(c["sin"], path + ".sin");
    return f;
  }
  if (type == "samples") {
    rd.check_keys(c, path, {"type", "values"});
    if (!c.contains("values")) throw ConfigError(path + ".values: required for sampled curvature");
    return SampledCurvature{Reader::numbers(c["values"], path + ".values")};
  }
  throw ConfigError(path + ".type: expected \"constant\", \"fourier\" or \"samples\"");
}

json curvature_json(const CurvatureSpec& spec) {
  if (const auto* c = std::get_if<ConstantCurvature>(&spec)) return {{"type", "constant"}, {"value", c->value}};
  if (const auto* f = std::get_if<FourierCurvature>(&spec))
    return {{"type", "fourier"}, {"mean", f->mean}, {"cos", f->cos_coefficients}, {"sin", f->sin_coefficients}};
  return {{"type", "samples"}, {"values", std::get<SampledCurvature>(spec).values}};
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

RunConfig parse_config(const std::string& text, bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  const Reader rd{strict, cfg.warnings};
  rd.check_keys(doc, "", {"geometry", "m", "epsilon", "grid", "toda", "spectral", "output"});

  if (doc.contains("geometry")) {
    const json& g = doc["geometry"];
    rd.check_keys(g, "geometry", {"length", "curvature"});
    if (g.contains("length")) cfg.length = Reader::number(g["length"], "geometry.length");
    if (g.contains("curvature")) cfg.curvature = parse_curvature(g["curvature"], rd);
  }
  if (!(cfg.length > 0.0)) throw ConfigError("geometry.length: must be positive");
  try {
    (void)cfg.curve();
  } catch (const PositivityError& e) {
    throw ConfigError("geometry.curvature: must be positive everywhere (" + std::string(e.what()) +
                      " at y = " + std::to_string(e.y()) + ")");
  } catch (const Error& e) {
    throw ConfigError(std::string("geometry.curvature: ") + e.what());
  }

  if (doc.contains("m")) cfg.m = Reader::integer(doc["m"], "m");
  if (cfg.m < 1 || cfg.m > 12) throw ConfigError("m: must lie in 1..12");

  if (doc.contains("epsilon")) {
    const json& e = doc["epsilon"];
    if (e.is_object()) {
      rd.check_keys(e, "epsilon", {"min", "max", "steps"});
      for (const char* k : {"min", "max", "steps"})
        if (!e.contains(k)) throw ConfigError(std::string("epsilon.") + k + ": required for a range");
      EpsilonRange r{Reader::number(e["min"], "epsilon.min"), Reader::number(e["max"], "epsilon.max"),
                     Reader::integer(e["steps"], "epsilon.steps")};
      check_epsilon(r.min, "epsilon.min");
      check_epsilon(r.max, "epsilon.max");
      if (r.max < r.min) throw ConfigError("epsilon.max: must not be below epsilon.min");
      if (r.steps < 1) throw ConfigError("epsilon.steps: must be positive");
      cfg.epsilon_range = r;
      cfg.epsilon = r.max;
    } else {
      cfg.epsilon = Reader::number(e, "epsilon");
    }
  }
  check_epsilon(cfg.epsilon, "epsilon");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    rd.check_keys(g, "grid", {"n_y", "n_t", "t_extent", "n_curve"});
    if (g.contains("n_y")) cfg.grid.n_y = Reader::integer(g["n_y"], "grid.n_y");
    if (g.contains("n_t")) cfg.grid.n_t = Reader::integer(g["n_t"], "grid.n_t");
    if (g.contains("n_curve")) cfg.grid.n_curve = Reader::integer(g["n_curve"], "grid.n_curve");
    if (g.contains("t_extent")) {
      const json& t = g["t_extent"];
      if (t.is_string()) {
        if (t.get<std::string>() != "auto") throw ConfigError("grid.t_extent: expected a number or \"auto\"");
      } else {
        cfg.grid.t_extent = Reader::number(t, "grid.t_extent");
        if (!(*cfg.grid.t_extent > 0.0)) throw ConfigError("grid.t_extent: must be positive");
      }
    }
  }
  if (cfg.grid.n_y < 16 || cfg.grid.n_y % 2) throw ConfigError("grid.n_y: must be even and at least 16");
  if (cfg.grid.n_curve < 16 || cfg.grid.n_curve % 2)
    throw ConfigError("grid.n_curve: must be even and at least 16");
  if (cfg.grid.n_t != 0 && (cfg.grid.n_t < 7 || cfg.grid.n_t % 2 == 0))
    throw ConfigError("grid.n_t: must be odd and at least 7 (or 0 for auto)");

  if (doc.contains("toda")) {
    const json& t = doc["toda"];
    rd.check_keys(t, "toda", {"k", "max_iterations", "tolerance"});
    if (t.contains("k")) cfg.toda.k = Reader::integer(t["k"], "toda.k");
    if (t.contains("max_iterations")) cfg.toda.max_iterations = Reader::integer(t["max_iterations"], "toda.max_iterations");
    if (t.contains("tolerance")) cfg.toda.tolerance = Reader::number(t["tolerance"], "toda.tolerance");
  }
  if (cfg.toda.k < 1 || cfg.toda.k > 6) throw ConfigError("toda.k: must lie in 1..6");
  if (cfg.toda.max_iterations < 1) throw ConfigError("toda.max_iterations: must be positive");
  if (!(cfg.toda.tolerance > 0.0)) throw ConfigError("toda.tolerance: must be positive");

  if (doc.contains("spectral")) {
    const json& s = doc["spectral"];
    rd.check_keys(s, "spectral", {"c_gap", "eigen_count", "sigma"});
    if (s.contains("c_gap")) cfg.spectral.c_gap = Reader::number(s["c_gap"], "spectral.c_gap");
    if (s.contains("eigen_count")) cfg.spectral.eigen_count = Reader::integer(s["eigen_count"], "spectral.eigen_count");
    if (s.contains("sigma")) cfg.spectral.sigma = Reader::number(s["sigma"], "spectral.sigma");
  }
  if (cfg.spectral.c_gap < 0.0) throw ConfigError("spectral.c_gap: must be nonnegative");
  if (cfg.spectral.eigen_count < 1) throw ConfigError("spectral.eigen_count: must be positive");
  if (!(cfg.spectral.sigma > 0.0)) throw ConfigError("spectral.sigma: must be positive");

  if (doc.contains("output")) {
    const json& o = doc["output"];
    rd.check_keys(o, "output", {"directory", "formats"});
    if (o.contains("directory")) {
      if (!o["directory"].is_string()) throw ConfigError("output.directory: expected a string");
      cfg.output.directory = o["directory"].get<std::string>();
    }
    if (o.contains("formats")) {
      if (!o["formats"].is_array()) throw ConfigError("output.formats: expected an array");
      cfg.output.formats.clear();
      for (const auto& f : o["formats"]) {
        if (!f.is_string() || (f != "json" && f != "csv"))
          throw ConfigError("output.formats: entries must be \"json\" or \"csv\"");
        cfg.output.formats.push_back(f.get<std::string>());
      }
    }
  }
  return cfg;
}

json to_json(const RunConfig& c) {
  json eps = c.epsilon;
  if (c.epsilon_range)
    eps = {{"min", c.epsilon_range->min}, {"max", c.epsilon_range->max}, {"steps", c.epsilon_range->steps}};
  json grid = {{"n_y", c.grid.n_y}, {"n_t", c.grid.n_t}, {"n_curve", c.grid.n_curve}};
  grid["t_extent"] = c.grid.t_extent ? json(*c.grid.t_extent) : json("auto");
  return {{"geometry", {{"length", c.length}, {"curvature", curvature_json(c.curvature)}}},
          {"m", c.m},
          {"epsilon", eps},
          {"grid", grid},
          {"toda", {{"k", c.toda.k}, {"max_iterations", c.toda.max_iterations}, {"tolerance", c.toda.tolerance}}},
          {"spectral", {{"c_gap", c.spectral.c_gap}, {"eigen_count", c.spectral.eigen_count}, {"sigma", c.spectral.sigma}}},
          {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

std::uint64_t config_hash(const RunConfig& config) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const std::string s = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mlac
