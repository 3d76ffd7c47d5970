#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "itmlab/circle_maps.hpp"
#include "itmlab/error.hpp"
#include "itmlab/interval_set.hpp"
#include "itmlab/itm.hpp"
#include "itmlab/measure.hpp"
#include "itmlab/scalar.hpp"

namespace itmlab::io {

using json = nlohmann::json;

/// Either backend, as read from a document.
using AnyItm = std::variant<Itm<Rational>, Itm<double>>;
using AnyCtm = std::variant<Ctm<Rational>, Ctm<double>>;

inline json to_json_scalar(const Rational& v) { return format_rational(v); }
inline json to_json_scalar(double v) { return v; }

namespace detail {

enum class Kind { Rational, Float };

inline Kind kind_of(const json& v) {
  if (v.is_string()) return Kind::Rational;
  if (v.is_number()) return Kind::Float;
  throw Error(ErrorCode::ConfigError, "scalar must be a \"p/q\" string or a number");
}

/// Backend of a list of scalars, checked against the optional "backend" field.
inline Kind backend_of(const json& doc, std::initializer_list<const char*> keys) {
  bool seen = false;
  Kind kind = Kind::Float;
  for (const char* key : keys) {
    for (const auto& v : doc.at(key)) {
      const Kind k = kind_of(v);
      if (seen && k != kind) throw Error(ErrorCode::MixedBackends, std::string("mixed scalar kinds in '") + key + "'");
      kind = k;
      seen = true;
    }
  }
  if (doc.contains("circumference")) {
    const Kind k = kind_of(doc["circumference"]);
    if (seen && k != kind) throw Error(ErrorCode::MixedBackends, "circumference backend differs");
    kind = k;
  }
  if (doc.contains("backend")) {
    const std::string b = doc["backend"].get<std::string>();
    if (b != "rational" && b != "float") throw Error(ErrorCode::ConfigError, "backend must be rational or float");
    const Kind declared = b == "rational" ? Kind::Rational : Kind::Float;
    if (seen && declared != kind) {
      throw Error(ErrorCode::MixedBackends, "declared backend '" + b + "' does not match the scalars");
    }
    kind = declared;
  }
  return kind;
}

template <Scalar S>
S scalar_from(const json& v) {
  if constexpr (ScalarTraits<S>::exact) {
    return parse_rational(v.get<std::string>());
  } else {
    return v.get<double>();
  }
}

template <Scalar S>
std::vector<S> list_from(const json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::ConfigError, "expected an array of scalars");
  std::vector<S> out;
  for (const auto& v : arr) out.push_back(scalar_from<S>(v));
  return out;
}

inline void require_keys(const json& doc, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> allowed) {
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "map spec must be a JSON object");
  for (const char* key : required) {
    if (!doc.contains(key)) throw Error(ErrorCode::ConfigError, std::string("missing key '") + key + "'");
  }
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
  }
}

}  // namespace detail

template <Scalar S>
json to_json(const Itm<S>& itm) {
  json doc;
  doc["breakpoints"] = json::array();
  for (const auto& t : itm.breakpoints()) doc["breakpoints"].push_back(to_json_scalar(t));
  doc["offsets"] = json::array();
  for (const auto& c : itm.offsets()) doc["offsets"].push_back(to_json_scalar(c));
  doc["backend"] = std::string(ScalarTraits<S>::backend);
  return doc;
}

inline AnyItm itm_from_json(const json& doc, Tolerance tol = {}) {
  detail::require_keys(doc, {"breakpoints", "offsets"}, {"breakpoints", "offsets", "backend"});
  if (detail::backend_of(doc, {"breakpoints", "offsets"}) == detail::Kind::Rational) {
    return Itm<Rational>::make(detail::list_from<Rational>(doc["breakpoints"]),
                               detail::list_from<Rational>(doc["offsets"]), tol);
  }
  return Itm<double>::make(detail::list_from<double>(doc["breakpoints"]),
                           detail::list_from<double>(doc["offsets"]), tol);
}

template <Scalar S>
json to_json(const Ctm<S>& ctm) {
  json doc;
  doc["circumference"] = to_json_scalar(ctm.circumference());
  doc["breakpoints"] = json::array();
  for (const auto& t : ctm.breakpoints()) doc["breakpoints"].push_back(to_json_scalar(t));
  doc["offsets"] = json::array();
  for (const auto& c : ctm.offsets()) doc["offsets"].push_back(to_json_scalar(c));
  doc["backend"] = std::string(ScalarTraits<S>::backend);
  return doc;
}

inline AnyCtm ctm_from_json(const json& doc, Tolerance tol = {}) {
  detail::require_keys(doc, {"circumference", "breakpoints", "offsets"},
                       {"circumference", "breakpoints", "offsets", "backend"});
  if (detail::backend_of(doc, {"breakpoints", "offsets"}) == detail::Kind::Rational) {
    return Ctm<Rational>::make(detail::scalar_from<Rational>(doc["circumference"]),
                               detail::list_from<Rational>(doc["breakpoints"]),
                               detail::list_from<Rational>(doc["offsets"]), tol);
  }
  return Ctm<double>::make(detail::scalar_from<double>(doc["circumference"]),
                           detail::list_from<double>(doc["breakpoints"]),
                           detail::list_from<double>(doc["offsets"]), tol);
}

template <Scalar S>
json to_json(const IntervalSet<S>& set) {
  json arr = json::array();
  for (const auto& p : set.intervals()) arr.push_back({to_json_scalar(p.lo), to_json_scalar(p.hi)});
  return arr;
}

template <Scalar S>
json to_json(const ClosedIntervalSet<S>& set) {
  json arr = json::array();
  for (const auto& p : set.parts) arr.push_back({to_json_scalar(p.lo), to_json_scalar(p.hi)});
  return arr;
}

template <Scalar S>
IntervalSet<S> interval_set_from_json(const json& arr, Ambient<S> ambient = {}, Tolerance tol = {}) {
  if (!arr.is_array()) throw Error(ErrorCode::ConfigError, "interval set must be an array of pairs");
  std::vector<Interval<S>> parts;
  for (const auto& pair : arr) {
    if (!pair.is_array() || pair.size() != 2) throw Error(ErrorCode::ConfigError, "interval must be [lo, hi]");
    parts.push_back({detail::scalar_from<S>(pair[0]), detail::scalar_from<S>(pair[1])});
  }
  return IntervalSet<S>(std::move(parts), ambient, tol);
}

inline std::string measure_csv(const EmpiricalMeasure& m) {
  std::string out = "bin_lo,bin_hi,weight\n";
  char buf[96];
  for (std::size_t i = 0; i < m.bins(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", m.bin_lo(i), m.bin_hi(i), m.weights[i]);
    out += buf;
  }
  return out;
}

/// Component supports and the periodic support of an estimate.
inline json to_json(const MaximalMeasureEstimate& est) {
  json doc;
  doc["periodic_support"] = to_json(est.periodic_support);
  doc["rigid_segment_count"] = est.rigid_segment_count;
  doc["components"] = json::array();
  for (const auto& part : est.non_atomic) {
    doc["components"].push_back({{"support", to_json(part.support)}, {"members", part.members}});
  }
  doc["combined_support"] = to_json(est.combined.support());
  doc["containment_holds"] = est.containment_holds;
  std::size_t periodic = 0;
  for (bool p : est.sample_periodic) periodic += p ? 1 : 0;
  doc["periodic_samples"] = periodic;
  return doc;
}

}  // namespace itmlab::io
