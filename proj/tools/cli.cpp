#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "itmlab/itmlab.hpp"

namespace itmlab::cli {
namespace {

using json = nlohmann::json;

// Flag overrides shared by every leaf command; a command rejects the ones it
// does not use, exactly as it rejects unknown config keys.
struct Flags {
  std::optional<std::string> config, map, backend, out, lambda_rule;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> lambda, alpha, beta, alpha_lo, alpha_hi, gap_tol;
  std::optional<std::size_t> grid, orbit_len, bins;
};

/// The merged config of one run. Every value read is echoed, with its
/// effective default, into the output metadata.
class Settings {
 public:
  Settings(json doc, std::set<std::string> allowed) : doc_(std::move(doc)) {
    for (const auto& [key, _] : doc_.items()) {
      if (!allowed.contains(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_[key].is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    T value = fallback;
    if (has(key)) {
      try {
        value = doc_[key].get<T>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "bad value for '" + key + "': " + e.what());
      }
    }
    used_[key] = value;
    return value;
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw Error(ErrorCode::ConfigError, "missing key '" + key + "'");
    return get<T>(key, T{});
  }

  const json& raw(const std::string& key) const { return doc_.at(key); }
  void note(const std::string& key, json value) { used_[key] = std::move(value); }
  const json& used() const { return used_; }

 private:
  json doc_;
  json used_ = json::object();
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

json merged_config(const Flags& f) {
  json doc = f.config ? load_json_file(*f.config) : json::object();
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  if (f.map) doc["map"] = load_json_file(*f.map);
  if (f.alpha || f.beta) {  // flags win, and exactly one of alpha/beta survives
    doc.erase("alpha");
    doc.erase("beta");
  }
  auto set = [&](const char* key, const auto& opt) {
    if (opt) doc[key] = *opt;
  };
  set("backend", f.backend);
  set("out", f.out);
  set("lambda_rule", f.lambda_rule);
  set("seed", f.seed);
  set("threads", f.threads);
  set("lambda", f.lambda);
  set("alpha", f.alpha);
  set("beta", f.beta);
  set("alpha_lo", f.alpha_lo);
  set("alpha_hi", f.alpha_hi);
  set("gap_tol", f.gap_tol);
  set("grid", f.grid);
  set("orbit_len", f.orbit_len);
  set("bins", f.bins);
  return doc;
}

void write_file(const std::string& path, const std::string& text) { sweep::write_text(path, text); }

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json meta_of(const std::string& command, const Settings& s) {
  return {{"tool", "itmlab"}, {"command", command}, {"settings", s.used()}};
}

// ---------------------------------------------------------------- map specs

io::AnyItm convert(io::AnyItm itm, const std::string& backend) {
  if (backend.empty()) return itm;
  if (backend != "rational" && backend != "float") {
    throw Error(ErrorCode::ConfigError, "backend must be rational or float");
  }
  if (backend == "float" && std::holds_alternative<Itm<Rational>>(itm)) {
    const auto& r = std::get<Itm<Rational>>(itm);
    std::vector<double> t, c;
    for (const auto& v : r.breakpoints()) t.push_back(to_double(v));
    for (const auto& v : r.offsets()) c.push_back(to_double(v));
    return Itm<double>::make(std::move(t), std::move(c), r.tolerance());
  }
  if (backend == "rational" && std::holds_alternative<Itm<double>>(itm)) {
    const auto& d = std::get<Itm<double>>(itm);
    std::vector<Rational> t, c;
    for (double v : d.breakpoints()) t.emplace_back(v);
    for (double v : d.offsets()) c.emplace_back(v);
    return Itm<Rational>::make(std::move(t), std::move(c), d.tolerance());
  }
  return itm;
}

io::AnyItm map_from(Settings& s, const std::string& key = "map") {
  const Tolerance tol{s.get<double>("eps", 1e-12)};
  if (!s.has(key)) throw Error(ErrorCode::ConfigError, "missing key '" + key + "'");
  auto itm = convert(io::itm_from_json(s.raw(key), tol), s.get<std::string>("backend", ""));
  s.note(key, std::visit([](const auto& m) { return io::to_json(m); }, itm));
  return itm;
}

template <Scalar S>
S scalar_value(const json& v) {
  if constexpr (ScalarTraits<S>::exact) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    return Rational(v.get<double>());
  } else {
    if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
    return v.get<double>();
  }
}

template <Scalar S>
S scalar_setting(Settings& s, const std::string& key, const json& fallback) {
  const json v = s.has(key) ? s.raw(key) : fallback;
  s.note(key, v);
  try {
    return scalar_value<S>(v);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "bad scalar for '" + key + "': " + e.what());
  }
}

trader::TraderParams trader_params(Settings& s) {
  const double lambda = s.require<double>("lambda");
  const bool a = s.has("alpha"), b = s.has("beta");
  if (a == b) throw Error(ErrorCode::ConfigError, "give exactly one of alpha and beta");
  try {
    return a ? trader::TraderParams::from_alpha(lambda, s.get<double>("alpha", 0.0))
             : trader::TraderParams::from_beta(lambda, s.get<double>("beta", 0.0));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

json separatrices_json(const std::vector<SeparatrixReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back({{"source", r.source}, {"target", r.target}, {"steps", r.steps},
                   {"side", std::string(to_string(r.side))}});
  }
  return arr;
}

std::string intervals_csv(const json& pairs) {
  std::string out = "lo,hi\n";
  for (const auto& p : pairs) out += p[0].dump() + "," + p[1].dump() + "\n";
  return out;
}

MaximalMeasureConfig measure_config(Settings& s, std::size_t default_bins = 100) {
  MaximalMeasureConfig cfg;
  cfg.sample_count = s.get<std::size_t>("sample_count", cfg.sample_count);
  cfg.orbit_len = s.get<std::size_t>("orbit_len", cfg.orbit_len);
  cfg.bins = s.get<std::size_t>("bins", default_bins);
  cfg.max_period = s.get<std::size_t>("max_period", cfg.max_period);
  cfg.burn_in = s.get<std::size_t>("burn_in", cfg.burn_in);
  cfg.seed = s.get<std::uint64_t>("seed", cfg.seed);
  cfg.threads = s.has("threads") ? s.raw("threads").get<unsigned>() : 0;  // not echoed: never changes results
  cfg.limits.max_intervals = s.get<std::size_t>("max_intervals", cfg.limits.max_intervals);
  if (cfg.sample_count < 1 || cfg.orbit_len < 1 || cfg.bins < 1 || cfg.max_period < 1) {
    throw Error(ErrorCode::ConfigError, "sample_count, orbit_len, bins and max_period must be >= 1");
  }
  return cfg;
}

// ---------------------------------------------------------------- commands

const std::set<std::string> kCommon{"seed", "backend", "out", "threads", "eps"};

std::set<std::string> keys(std::initializer_list<const char*> extra) {
  std::set<std::string> out = kCommon;
  for (const char* k : extra) out.insert(k);
  return out;
}

template <Scalar S>
json analyze_map(const Itm<S>& itm, Settings& s, const std::string& out) {
  const Limits limits{s.get<std::size_t>("max_intervals", Limits{}.max_intervals)};
  const auto max_iter = s.get<std::size_t>("max_iter", 1000);
  const auto max_period = s.get<std::size_t>("max_period", 50);
  const auto max_steps = s.get<std::size_t>("max_steps", 1000);
  const auto limit_n = s.get<std::size_t>("limit_n", 50);
  const bool sets = s.get<bool>("sets", false);
  if (sets && out.empty()) throw Error(ErrorCode::ConfigError, "'sets' needs an output path");

  json report;
  report["backend"] = std::string(ScalarTraits<S>::backend);
  report["segment_count"] = itm.segment_count();
  const auto fin = detect_finiteness(itm, max_iter, limits);
  report["finiteness"] = fin.finite()
                             ? json{{"status", "finite"}, {"step", fin.step}, {"attractor", io::to_json(fin.attractor)}}
                             : json{{"status", "undecided"}, {"max_iter", fin.max_iter}};
  json rigid = json::array();
  for (const auto& r : find_rigid_segments(itm, max_period, limits)) {
    rigid.push_back({{"interval", {io::to_json_scalar(r.interval.lo), io::to_json_scalar(r.interval.hi)}},
                     {"period", r.period}});
  }
  report["rigid_segments"] = rigid;
  report["is_iem"] = is_iem(itm);
  report["separatrices"] = separatrices_json(detect_separatrices(itm, max_steps));
  const json xi = io::to_json(limit_set(itm, limit_n, limits));
  report["limit_set"] = xi;
  if (sets) {
    const auto est = estimate_maximal_measure(itm, measure_config(s));
    const json support = io::to_json(est.combined.support());
    report["maximal_measure_support"] = support;
    write_file(out + ".xi.csv", intervals_csv(xi));
    write_file(out + ".support.csv", intervals_csv(support));
  }
  return report;
}

json cmd_itm_analyze(Settings& s) {
  const std::string out = s.get<std::string>("out", "");
  json report;
  if (s.has("lambda")) {
    if (s.has("map")) throw Error(ErrorCode::ConfigError, "give either a map or trader parameters");
    const auto params = trader_params(s);
    std::optional<std::size_t> K;
    if (s.has("K")) K = s.get<std::size_t>("K", 0);
    const auto built = trader::build_trader_itm(params, K, {s.get<double>("eps", 1e-12)});
    report = analyze_map(built.itm, s, out);
    report["regime"] = {{"n", built.regime.n},
                        {"lower_holds", built.regime.lower_holds},
                        {"upper_holds", built.regime.upper_holds}};
    report["interior_breakpoints"] = built.interior_breakpoints;
    report["itm"] = io::to_json(built.itm);
    report["ctm"] = io::to_json(built.ctm);
  } else {
    report = std::visit([&](const auto& itm) { return analyze_map(itm, s, out); }, map_from(s));
  }
  report["meta"] = meta_of("itm analyze", s);
  if (!out.empty()) write_file(out, dump(report));
  return report;
}

template <Scalar S>
json measure_map(const Itm<S>& itm, Settings& s, const std::string& out) {
  const auto cfg = measure_config(s);
  const auto est = estimate_maximal_measure(itm, cfg);
  json report = io::to_json(est);
  report["component_count"] = est.non_atomic.size();
  report["segment_count"] = itm.segment_count();
  double lo = 1.0, hi = 0.0;
  for (double w : est.combined.weights) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  report["max_min_ratio"] = lo > 0 ? json(hi / lo) : json(nullptr);
  if (s.has("birkhoff")) {
    const json& b = s.raw("birkhoff");
    for (const auto& [key, _] : b.items()) {
      if (key != "x0" && key != "lo" && key != "hi" && key != "n") {
        throw Error(ErrorCode::ConfigError, "unknown key 'birkhoff." + key + "'");
      }
    }
    const std::size_t n = b.value("n", std::size_t{1'000'000});
    const S x0 = scalar_value<S>(b.value("x0", json(0)));
    const S u_lo = scalar_value<S>(b.at("lo"));
    const S u_hi = scalar_value<S>(b.at("hi"));
    s.note("birkhoff", b);
    report["birkhoff_frequency"] = birkhoff_frequency(itm, x0, u_lo, u_hi, n);
  }
  if (!out.empty()) write_file(out, io::measure_csv(est.combined));
  return report;
}

json cmd_itm_measure(Settings& s) {
  const std::string out = s.get<std::string>("out", "");
  json report = std::visit([&](const auto& itm) { return measure_map(itm, s, out); }, map_from(s));
  report["meta"] = meta_of("itm measure", s);
  if (!out.empty()) write_file(out + ".json", dump(report));
  return report;
}

template <Scalar S>
json symbolic_map(const Itm<S>& itm, Settings& s, const std::string& out) {
  const S x0 = scalar_setting<S>(s, "x0", json(0));
  const auto length = s.get<std::size_t>("length", 1000);
  const auto max_len = s.get<std::size_t>("max_len", 10);
  const auto samples = s.get<std::size_t>("sample_count", 4);
  const auto seed = s.get<std::uint64_t>("seed", 1);
  const auto max_steps = s.get<std::size_t>("max_steps", 1000);
  const SeparatrixConfig sep_cfg{s.get<double>("eps_left", 1e-9)};

  json report;
  const auto main_it = itinerary(itm, x0, length);
  std::vector<Itinerary> pool{main_it};
  SeededUniform rng(seed);
  const double lo = to_double(itm.domain_lo()), hi = to_double(itm.domain_hi());
  for (std::size_t i = 0; i < samples; ++i) pool.push_back(itinerary(itm, S(rng.uniform(lo, hi)), length));
  const auto rows = word_complexity(pool, max_len);
  const auto seps = detect_separatrices(itm, max_steps, sep_cfg);
  json table = json::array();
  for (const auto& r : rows) table.push_back({{"L", r.length}, {"count", r.count}});
  report["itinerary"] = main_it.to_text();
  report["complexity"] = table;
  report["separatrices"] = separatrices_json(seps);
  const auto diag = minimality_diagnostic(itm, pool, max_len, max_steps);
  report["minimality"] = {{"separatrix_free", diag.separatrix_free},
                          {"factor_sets_agree", diag.factor_sets_agree},
                          {"evidence", diag.minimal_evidence()}};
  if (s.has("syndetic")) {
    const json& u = s.raw("syndetic");
    const S u_lo = scalar_value<S>(u.at("lo"));
    const S u_hi = scalar_value<S>(u.at("hi"));
    const std::size_t n = u.value("n", std::size_t{100'000});
    s.note("syndetic", u);
    const auto gap = syndetic_gap(itm, x0, u_lo, u_hi, n);
    report["syndetic_gap"] = gap ? json(*gap) : json("NoReturn");
  }
  if (!out.empty()) {
    write_file(out, complexity_csv(rows));
    write_file(out + ".itinerary.txt", main_it.to_text() + "\n");
  }
  return report;
}

json cmd_itm_symbolic(Settings& s) {
  const std::string out = s.get<std::string>("out", "");
  json report = std::visit([&](const auto& itm) { return symbolic_map(itm, s, out); }, map_from(s));
  report["meta"] = meta_of("itm symbolic", s);
  if (!out.empty()) write_file(out + ".meta.json", dump(report["meta"]));
  return report;
}

json cmd_trader_poincare(Settings& s) {
  const auto params = trader_params(s);
  const auto cap = s.get<std::size_t>("max_return_steps", 1'000'000);
  std::vector<double> xs{1.0};
  if (s.has("x")) {
    const json& v = s.raw("x");
    xs = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  }
  s.note("x", xs);
  json report;
  report["lambda"] = params.lambda();
  report["alpha"] = params.alpha();
  report["beta"] = params.beta();
  const bool analyzed = params.in_analyzed_regime();
  if (analyzed) {
    const auto ladder = trader::q_ladder(params, 2);
    report["q1"] = ladder.q[0];
    report["m_lo"] = ladder.m_lo;
    report["nu_hi"] = ladder.nu_hi;
  }
  json points = json::array();
  for (double x : xs) {
    const auto ret = trader::first_return(params, x, cap);
    json p{{"x", x}, {"simulated", std::fabs(ret.x)}, {"signed_return", ret.x}, {"steps", ret.steps}};
    if (analyzed && x > 0) {
      const double closed = trader::poincare_T(params, x, trader::PoincareMode::ClosedForm);
      p["closed_form"] = closed;
      p["difference"] = std::fabs(closed - std::fabs(ret.x));
    }
    points.push_back(p);
  }
  report["points"] = points;
  report["meta"] = meta_of("trader poincare", s);
  if (const auto out = s.get<std::string>("out", ""); !out.empty()) write_file(out, dump(report));
  return report;
}

json cmd_trader_build_itm(Settings& s) {
  const auto params = trader_params(s);
  std::optional<std::size_t> K;
  if (s.has("K")) K = s.get<std::size_t>("K", 0);
  const auto n = s.get<std::size_t>("rotation_steps", 1'000'000);
  const auto built = trader::build_trader_itm(params, K, {s.get<double>("eps", 1e-12)});
  json report;
  report["regime"] = {{"n", built.regime.n},
                      {"lower_holds", built.regime.lower_holds},
                      {"upper_holds", built.regime.upper_holds}};
  report["interior_breakpoints"] = built.interior_breakpoints;
  report["m_lo"] = built.ladder.m_lo;
  report["nu_hi"] = built.ladder.nu_hi;
  report["q"] = built.ladder.q;
  report["chi"] = built.ladder.chi;
  report["max_return_residual"] = built.ladder.max_return_residual;
  report["itm"] = io::to_json(built.itm);
  report["ctm"] = io::to_json(built.ctm);
  if (built.ctm.is_rotation()) {
    const auto rho = rotation_number(built.ctm, 0.0, n);
    const double theta = std::log(built.ladder.nu_hi / built.ladder.m_lo);
    const double chi2 = built.ladder.chi.size() > 1 ? built.ladder.chi[1] : std::nan("");
    report["rotation"] = {{"value", rho.value},
                          {"orbit_estimate", rho.orbit_estimate},
                          {"paper_formula", std::log(chi2 / built.ladder.m_lo) / theta}};
  }
  report["meta"] = meta_of("trader build-itm", s);
  if (const auto out = s.get<std::string>("out", ""); !out.empty()) write_file(out, dump(report));
  return report;
}

std::string summary_path(const std::string& out) {
  const auto dot = out.rfind(".csv");
  return (dot != std::string::npos && dot + 4 == out.size() ? out.substr(0, dot) : out) + ".summary.csv";
}

json cmd_trader_sweep(Settings& s) {
  sweep::SweepConfig cfg;
  cfg.beta = s.get<double>("beta", cfg.beta);
  cfg.alpha_lo = s.get<double>("alpha_lo", cfg.alpha_lo);
  cfg.alpha_hi = s.get<double>("alpha_hi", cfg.alpha_hi);
  cfg.grid = s.get<std::size_t>("grid", cfg.grid);
  cfg.orbit_len = s.get<std::size_t>("orbit_len", cfg.orbit_len);
  cfg.burn_in = s.get<std::size_t>("burn_in", cfg.burn_in);
  cfg.gap_tol = s.get<double>("gap_tol", cfg.gap_tol);
  cfg.seed = s.get<std::uint64_t>("seed", cfg.seed);
  cfg.starts = s.get<std::size_t>("starts", cfg.starts);
  cfg.max_return_steps = s.get<std::size_t>("max_return_steps", cfg.max_return_steps);
  cfg.threads = s.has("threads") ? s.raw("threads").get<unsigned>() : 0;
  try {
    cfg.rule = sweep::lambda_rule_from_string(
        s.get<std::string>("lambda_rule", std::string(sweep::to_string(cfg.rule))));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  const std::string out = s.get<std::string>("out", "sweep.csv");
  if (cfg.grid < 1) throw Error(ErrorCode::ConfigError, "grid must be >= 1");
  if (cfg.grid == 1 ? cfg.alpha_lo > cfg.alpha_hi : !(cfg.alpha_lo < cfg.alpha_hi)) {
    throw Error(ErrorCode::ConfigError, "alpha_lo must be below alpha_hi");
  }
  if (!(cfg.gap_tol > 0) || cfg.starts < 1 || cfg.orbit_len < 1) {
    throw Error(ErrorCode::ConfigError, "gap_tol must be positive; starts and orbit_len >= 1");
  }
  const double lambda_lo = sweep::lambda_for(cfg.rule, cfg.alpha_lo, cfg.beta);
  const double lambda_hi = sweep::lambda_for(cfg.rule, cfg.alpha_hi, cfg.beta);
  if (std::max(std::fabs(lambda_lo), std::fabs(lambda_hi)) >= 1.0) {
    throw Error(ErrorCode::ConfigError, "alpha range puts lambda outside (-1, 1)");
  }
  spdlog::info("sweep: beta={} alpha in [{}, {}], {} points", cfg.beta, cfg.alpha_lo, cfg.alpha_hi, cfg.grid);
  const auto records = sweep::sweep_alpha(cfg);
  const auto rows = sweep::export_sweep(records, out);
  sweep::export_summary(records, summary_path(out));
  json report;
  report["rows"] = rows;
  report["records"] = records.size();
  report["bands_csv"] = out;
  report["summary_csv"] = summary_path(out);
  json patterns = json::array();
  for (const auto& p : sweep::band_adding_patterns(records)) {
    patterns.push_back({{"counts", {p.left.count, p.middle.count, p.right.count}},
                        {"alpha_from", records[p.left.first].alpha},
                        {"alpha_to", records[p.right.last].alpha}});
  }
  report["band_adding_patterns"] = patterns;
  report["meta"] = meta_of("trader sweep", s);
  write_file(out + ".meta.json", dump(report["meta"]));
  return report;
}

json cmd_measure_converge(Settings& s) {
  const auto cfg = measure_config(s, 50);
  const std::string out = s.get<std::string>("out", "");
  const Tolerance tol{s.get<double>("eps", 1e-12)};
  std::vector<Itm<double>> approximants;
  std::optional<Itm<double>> target;
  auto as_float = [&](const json& spec) {
    return std::get<Itm<double>>(convert(io::itm_from_json(spec, tol), "float"));
  };
  if (s.has("golden_convergents")) {
    if (s.has("target") || s.has("approximants")) {
      throw Error(ErrorCode::ConfigError, "golden_convergents replaces target/approximants");
    }
    const auto qs = s.get<std::vector<int>>("golden_convergents", {});
    const double gamma = (std::sqrt(5.0) - 1.0) / 2.0;
    target = Itm<double>::make({0.0, 1.0 - gamma, 1.0}, {gamma, gamma - 1.0}, tol);
    for (int q : qs) {
      if (q < 1) throw Error(ErrorCode::ConfigError, "convergent denominators must be positive");
      const double p = std::round(gamma * q);
      const double r = p / q;
      approximants.push_back(Itm<double>::make({0.0, 1.0 - r, 1.0}, {r, r - 1.0}, tol));
    }
  } else {
    if (!s.has("target") || !s.has("approximants")) {
      throw Error(ErrorCode::ConfigError, "need target and approximants, or golden_convergents");
    }
    target = as_float(s.raw("target"));
    for (const auto& spec : s.raw("approximants")) approximants.push_back(as_float(spec));
    s.note("target", s.raw("target"));
    s.note("approximants", s.raw("approximants"));
  }
  const auto report_data = convergence_harness(*target, approximants, cfg);
  json table = json::array();
  std::string csv = "param_distance,measure_distance\n";
  for (const auto& p : report_data.points) {
    table.push_back({{"param_distance", p.param_distance}, {"measure_distance", p.measure_distance}});
    csv += sweep::format_double(p.param_distance) + "," + sweep::format_double(p.measure_distance) + "\n";
  }
  json report;
  report["table"] = table;
  report["breakpoint_bin_mass"] = report_data.breakpoint_bin_mass;
  report["meta"] = meta_of("measure converge", s);
  if (!out.empty()) {
    write_file(out, csv);
    write_file(out + ".meta.json", dump(report["meta"]));
  }
  return report;
}

// ---------------------------------------------------------------- plumbing

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--map", f.map, "ITM spec JSON file (sets the 'map' key)");
  cmd->add_option("--seed", f.seed, "PRNG seed");
  cmd->add_option("--backend", f.backend, "rational or float")->check(CLI::IsMember({"rational", "float"}));
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--threads", f.threads, "worker cap (0 = all cores)");
  cmd->add_option("--lambda", f.lambda);
  cmd->add_option("--alpha", f.alpha);
  cmd->add_option("--beta", f.beta);
  cmd->add_option("--alpha-lo", f.alpha_lo);
  cmd->add_option("--alpha-hi", f.alpha_hi);
  cmd->add_option("--grid", f.grid);
  cmd->add_option("--orbit-len", f.orbit_len);
  cmd->add_option("--bins", f.bins);
  cmd->add_option("--gap-tol", f.gap_tol);
  cmd->add_option("--lambda-rule", f.lambda_rule, "one_minus_alpha or beta_minus_alpha");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::MixedBackends:
      return kConfigError;
    case ErrorCode::ResourceLimit:
    case ErrorCode::NonEscaping:
      return kComputationLimit;
    case ErrorCode::IoError:
      return kIoError;
    default:
      return kFailure;
  }
}

void setup_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("itmlab", sink);
  logger->set_pattern("[%l] %v");
  const char* level = std::getenv("ITMLAB_LOG");
  logger->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

struct Command {
  std::string name;
  std::set<std::string> allowed;
  std::function<json(Settings&)> body;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging(err);
  CLI::App app{"Interval translation maps and the hysteresis trader model"};
  app.require_subcommand(1);
  Flags flags;

  const std::vector<Command> commands{
      {"itm analyze",
       keys({"map", "max_iter", "max_period", "max_steps", "limit_n", "sets", "sample_count", "orbit_len",
             "bins", "burn_in", "max_intervals", "lambda", "alpha", "beta", "K"}),
       cmd_itm_analyze},
      {"itm measure",
       keys({"map", "sample_count", "orbit_len", "bins", "max_period", "burn_in", "max_intervals", "birkhoff"}),
       cmd_itm_measure},
      {"itm symbolic",
       keys({"map", "x0", "length", "max_len", "sample_count", "max_steps", "eps_left", "syndetic"}),
       cmd_itm_symbolic},
      {"trader poincare", keys({"lambda", "alpha", "beta", "x", "max_return_steps"}), cmd_trader_poincare},
      {"trader build-itm", keys({"lambda", "alpha", "beta", "K", "rotation_steps"}), cmd_trader_build_itm},
      {"trader sweep",
       keys({"beta", "alpha_lo", "alpha_hi", "grid", "orbit_len", "burn_in", "gap_tol", "starts",
             "max_return_steps", "lambda_rule"}),
       cmd_trader_sweep},
      {"measure converge",
       keys({"target", "approximants", "golden_convergents", "sample_count", "orbit_len", "bins", "max_period",
             "burn_in", "max_intervals"}),
       cmd_measure_converge},
  };

  std::map<std::string, CLI::App*> groups;
  std::vector<std::pair<CLI::App*, const Command*>> leaves;
  for (const auto& c : commands) {
    const auto space = c.name.find(' ');
    const std::string group = c.name.substr(0, space);
    if (!groups.contains(group)) {
      groups[group] = app.add_subcommand(group);
      groups[group]->require_subcommand(1);
    }
    auto* leaf = groups[group]->add_subcommand(c.name.substr(space + 1));
    add_flags(leaf, flags);
    leaves.emplace_back(leaf, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    for (const auto& [leaf, command] : leaves) {
      if (!leaf->parsed()) continue;
      Settings settings(merged_config(flags), command->allowed);
      const json report = command->body(settings);
      out << dump(report);
      return kOk;
    }
    err << "no command given\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: ConfigError: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace itmlab::cli
