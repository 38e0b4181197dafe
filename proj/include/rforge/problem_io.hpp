#pragma once

// Problem description files (UTF-8 JSON):
//
//   {
//     "n_vars": 2,
//     "var_names": ["x", "y"],
//     "polys": [
//       [ {"exp": [2, 0], "slot": 0}, {"exp": [0, 0], "const": -5.0} ],
//       ...
//     ]
//   }
//
// Every term carries exactly one of "slot" (index into the per-instance
// coefficient vector) or "const". Serialization writes terms in ascending
// grevlex order, so parse -> serialize is a fixed point after one pass.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rforge/error.hpp"
#include "rforge/poly.hpp"

namespace rforge {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json monomial_to_json(const Monomial& m) { return Json(m.exponents()); }

inline Monomial monomial_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorKind::Parse, "exponent vector must be an array");
  std::vector<int> e;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(ErrorKind::Parse, "exponent must be an integer");
    e.push_back(v.get<int>());
  }
  return Monomial(std::move(e));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

inline Json system_to_json(const PolySystem& sys) {
  Json j;
  j["n_vars"] = sys.n_vars;
  j["var_names"] = sys.names();
  Json polys = Json::array();
  for (const auto& p : sys.polys) {
    Json terms = Json::array();
    for (const auto& t : p.terms()) {
      Json term;
      term["exp"] = detail::monomial_to_json(t.monomial);
      if (t.coef.is_slot())
        term["slot"] = *t.coef.slot;
      else
        term["const"] = t.coef.constant;
      terms.push_back(std::move(term));
    }
    polys.push_back(std::move(terms));
  }
  j["polys"] = std::move(polys);
  return j;
}

inline PolySystem system_from_json(const Json& j) {
  try {
    if (!j.is_object()) fail(ErrorKind::Parse, "problem must be a JSON object");
    PolySystem sys;
    if (!j.contains("n_vars") || !j["n_vars"].is_number_integer()) fail(ErrorKind::Parse, "missing integer n_vars");
    const auto n = j["n_vars"].get<long long>();
    if (n < 1) fail(ErrorKind::Parse, "n_vars must be positive");
    sys.n_vars = static_cast<std::size_t>(n);
    if (j.contains("var_names")) sys.var_names = j["var_names"].get<std::vector<std::string>>();
    if (!j.contains("polys") || !j["polys"].is_array()) fail(ErrorKind::Parse, "missing polys array");
    for (const auto& pj : j["polys"]) {
      if (!pj.is_array()) fail(ErrorKind::Parse, "polynomial must be an array of terms");
      std::vector<ParamTerm> terms;
      for (const auto& tj : pj) {
        if (!tj.is_object() || !tj.contains("exp")) fail(ErrorKind::Parse, "term needs an exp field");
        const bool has_slot = tj.contains("slot"), has_const = tj.contains("const");
        if (has_slot == has_const) fail(ErrorKind::Parse, "term needs exactly one of slot/const");
        Coefficient c = has_slot ? Coefficient::of_slot(tj["slot"].get<int>())
                                 : Coefficient::of_constant(tj["const"].get<double>());
        terms.push_back({detail::monomial_from_json(tj["exp"]), c});
      }
      sys.polys.emplace_back(std::move(terms));
    }
    sys.validate();
    return sys;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad problem file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(ErrorKind::Parse, std::string("bad problem file: ") + e.what());
  }
}

inline std::string serialize_system(const PolySystem& sys) { return system_to_json(sys).dump(2) + "\n"; }

inline PolySystem parse_system(const std::string& text) { return system_from_json(detail::parse_json(text)); }

inline PolySystem load_system(const std::string& path) { return parse_system(detail::read_file(path)); }

/// Coefficient files are a flat JSON array indexed by slot id.
inline std::vector<double> parse_coefficients(const std::string& text) {
  const Json j = detail::parse_json(text);
  if (!j.is_array()) fail(ErrorKind::Parse, "coefficients must be a JSON array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorKind::Parse, "coefficient must be a number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace rforge
