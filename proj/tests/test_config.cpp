#include <string>

#include "doctest.h"
#include "mlac/config.hpp"
#include "mlac/errors.hpp"

using namespace mlac;

namespace {
std::string error_of(const std::string& text, bool strict = false) {
  try {
    parse_config(text, strict);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal document gets defaults") {
    const RunConfig c = parse_config(
        R"({"geometry": {"length": 6.283, "curvature": {"type": "constant", "value": 1}}, "m": 2, "epsilon": 0.05})");
    CHECK(c.length == 6.283);
    CHECK(c.m == 2);
    CHECK(c.epsilon == 0.05);
    CHECK_FALSE(c.epsilon_range);
    CHECK(c.toda.k == 3);
    CHECK(c.spectral.c_gap == 0.1);
    CHECK(c.grid.n_y == 16);
    CHECK_FALSE(c.grid.t_extent);
    CHECK(c.wants("json"));
    CHECK(c.warnings.empty());
  }

  TEST_CASE("validation names the field") {
    const std::string neg = error_of(R"({"geometry": {"curvature": {"type": "constant", "value": -1}}})");
    CHECK(neg.find("curvature") != std::string::npos);
    CHECK(error_of(R"({"epsilon": 0.5})").find("epsilon") != std::string::npos);
    CHECK(error_of(R"({"m": 0})").find("m") != std::string::npos);
    CHECK(error_of(R"({"grid": {"n_t": 100}})").find("grid.n_t") != std::string::npos);
    CHECK(error_of(R"({"toda": {"k": 9}})").find("toda.k") != std::string::npos);
    CHECK(error_of(R"({"epsilon": {"min": 0.1, "max": 0.05, "steps": 4}})").find("epsilon") != std::string::npos);
    CHECK(error_of(R"({"output": {"formats": ["xml"]}})").find("output.formats") != std::string::npos);
    CHECK(error_of(R"({"m": 2,)").find("parse") != std::string::npos);
  }

  TEST_CASE("unknown keys") {
    const RunConfig lenient = parse_config(R"({"m": 2, "colour": "blue"})");
    REQUIRE(lenient.warnings.size() == 1);
    CHECK(lenient.warnings[0].find("colour") != std::string::npos);
    CHECK(error_of(R"({"m": 2, "colour": "blue"})", true).find("colour") != std::string::npos);
    CHECK(error_of(R"({"grid": {"nn": 1}})", true).find("grid.nn") != std::string::npos);
  }

  TEST_CASE("curvature kinds and epsilon ranges") {
    const RunConfig f = parse_config(
        R"({"geometry": {"length": 3, "curvature": {"type": "fourier", "mean": 1, "cos": [0.2], "sin": [0.1]}},
            "epsilon": {"min": 0.01, "max": 0.1, "steps": 5}, "grid": {"t_extent": 12}})");
    CHECK(f.curve()(0.0) == doctest::Approx(1.2));
    REQUIRE(f.epsilon_range);
    CHECK(f.epsilon_range->steps == 5);
    CHECK(*f.grid.t_extent == 12.0);
    const RunConfig s = parse_config(R"({"geometry": {"length": 1, "curvature": {"type": "samples", "values": [1, 2, 1, 2]}}})");
    CHECK(s.curve().length() == 1.0);
    CHECK(parse_config(R"({"grid": {"t_extent": "auto"}})").grid.t_extent.has_value() == false);
  }

  TEST_CASE("round trip and hash") {
    const RunConfig a = parse_config(R"({"m": 3, "epsilon": 0.02})");
    const RunConfig b = parse_config(to_json(a).dump(), true);
    CHECK(to_json(a) == to_json(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(parse_config(R"({"m": 3, "epsilon": 0.021})")));
  }
}
