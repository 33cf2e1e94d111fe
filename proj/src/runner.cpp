#include "shiftlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "shiftlab/blocks.hpp"
#include "shiftlab/dependence.hpp"
#include "shiftlab/distances.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/executor.hpp"
#include "shiftlab/rates.hpp"
#include "shiftlab/text.hpp"
#include "shiftlab/variance.hpp"

namespace shiftlab {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- parsing

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("syntax", "line " + std::to_string(lineno) + ": unclosed section");
      section = text::trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("syntax", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = text::trim(std::string_view(t).substr(0, eq));
    const std::string value = text::trim(std::string_view(t).substr(eq + 1));
    if (key.empty())
      throw ConfigError("syntax", "line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (cfg.has(key))
      throw ConfigError("duplicate-key", "line " + std::to_string(lineno) + ": '" + key +
                                             "' set twice");
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config-file", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::dependence_profile: return "dependence-profile";
    case ExperimentKind::variance_report: return "variance-report";
    case ExperimentKind::block_identities: return "block-identities";
    case ExperimentKind::distance_report: return "distance-report";
    case ExperimentKind::rate_sweep: return "rate-sweep";
    case ExperimentKind::oracle_check: return "oracle-check";
  }
  return "?";
}

namespace {

ExperimentKind parse_experiment(const std::string& s) {
  for (auto k : {ExperimentKind::dependence_profile, ExperimentKind::variance_report,
                 ExperimentKind::block_identities, ExperimentKind::distance_report,
                 ExperimentKind::rate_sweep, ExperimentKind::oracle_check})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown-experiment", "experiment: unknown kind '" + s + "'");
}

// ---------------------------------------------------------------- schema

struct KeySpec {
  const char* key;
  const char* fallback;
  /// empty: every family; otherwise a comma-separated family list
  const char* families;
  /// empty: every experiment
  const char* experiment;
};

constexpr KeySpec kSchema[] = {
    {"experiment", "distance-report", "", ""},
    {"seed", "1", "", ""},
    {"replications", "10000", "", ""},
    {"tolerance.truncation", "1e-8", "*", ""},
    {"process.family", "linear", "*", ""},
    {"process.moment_order", "3", "*", ""},
    {"process.scale", "1", "*", ""},
    {"process.window", "auto", "linear,recursion,garch", ""},
    {"process.innovation", "normal", "linear,mdep-block,garch,volterra", ""},
    {"process.coefficients", "geometric(0.5)", "linear", ""},
    {"process.map", "identity", "linear", ""},
    {"process.dyadic_map", "cosine", "dyadic", ""},
    {"process.bits", "53", "dyadic", ""},
    {"process.width", "2", "mdep-block", ""},
    {"process.block_map", "sum", "mdep-block", ""},
    {"process.a", "constant(0.5)", "recursion", ""},
    {"process.b", "normal", "recursion", ""},
    {"process.independent", "true", "recursion", ""},
    {"process.mu", "1", "garch", ""},
    {"process.alpha", "0.1", "garch", ""},
    {"process.beta", "0.1", "garch", ""},
    {"process.order", "2", "volterra", ""},
    {"process.max_lag", "10", "volterra", ""},
    {"process.kernel", "geometric(0.5,0.5)", "volterra", ""},
    {"dependence.p", "2", "*", "dependence-profile"},
    {"dependence.lags", "1..10", "*", "dependence-profile"},
    {"variance.max_lag", "20", "*", "variance-report"},
    {"variance.n", "256", "*", "variance-report"},
    {"variance.m", "8", "*", "variance-report"},
    {"blocks.n", "90", "*", "block-identities"},
    {"blocks.m", "10", "*", "block-identities"},
    {"blocks.c0", "0.5", "*", "block-identities"},
    {"blocks.redraws", "32", "*", "block-identities"},
    {"blocks.lambda", "none", "*", "block-identities"},
    {"blocks.p", "3", "*", "block-identities"},
    {"distance.n", "256", "*", "distance-report"},
    {"distance.p", "3", "*", "distance-report"},
    {"distance.q", "2", "*", "distance-report"},
    {"distance.moments", "1,2", "*", "distance-report"},
    {"distance.tail_x", "0,1,2,3,4", "*", "distance-report"},
    {"rate.statistic", "kolmogorov", "*", "rate-sweep"},
    {"rate.n", "128,256,512,1024", "*", "rate-sweep"},
    {"rate.p", "3", "*", "rate-sweep"},
    {"rate.q", "1", "*", "rate-sweep"},
    {"rate.normalizer_replications", "20000", "*", "rate-sweep"},
    {"tolerance.slope", "0.15", "*", "rate-sweep"},
    {"oracle.n", "4,16,36", "", "oracle-check"},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kSchema)
    if (key == k.key) return &k;
  return nullptr;
}

bool applies(const KeySpec& k, const std::string& family, ExperimentKind kind) {
  const std::string fams = k.families;
  const bool oracle = kind == ExperimentKind::oracle_check;
  if (!fams.empty()) {
    // process keys do not apply to the oracle, which fixes its own process
    if (oracle) return false;
    if (fams != "*") {
      bool hit = false;
      for (const auto& f : std::vector<std::string>{[&] {
             std::vector<std::string> parts;
             std::stringstream ss(fams);
             std::string part;
             while (std::getline(ss, part, ',')) parts.push_back(part);
             return parts;
           }()})
        hit = hit || f == family;
      if (!hit) return false;
    }
  }
  const std::string exp = k.experiment;
  return exp.empty() || exp == to_string(kind);
}

std::pair<double, double> kernel_params(const std::string& value) {
  const auto term = text::parse_call(value);
  if (term.name != "geometric" || term.args.size() != 2)
    throw ConfigError("syntax", "process.kernel: expected geometric(c, rho)");
  return {term.args[0], term.args[1]};
}

CoefficientRule parse_coefficients(const std::string& value) {
  const auto term = text::parse_call(value);
  if (term.name == "geometric" && term.args.size() == 1)
    return CoefficientRule::geometric(term.args[0]);
  if (term.name == "polynomial" && term.args.size() == 2)
    return CoefficientRule::polynomial(term.args[0], term.args[1]);
  if (term.name == "explicit" && !term.args.empty())
    return CoefficientRule::explicit_list(term.args);
  throw ConfigError("syntax", "process.coefficients: expected geometric(rho), "
                              "polynomial(a, c) or explicit(a0, a1, ...)");
}

PostMap parse_map(const std::string& value) {
  const auto term = text::parse_call(value);
  if (term.name == "identity" && term.args.empty()) return PostMap::identity();
  if (term.name == "holder" && term.args.size() == 2)
    return PostMap::holder(term.args[0], term.args[1]);
  if (term.name == "tanh" && term.args.size() == 1) return PostMap::tanh(term.args[0]);
  throw ConfigError("syntax", "process.map: expected identity, holder(beta, c) or tanh(c)");
}

template <class F>
auto with_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    const std::string prefix = e.rule() + ": ";
    std::string msg = what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
    if (msg.rfind(path, 0) != 0) msg = path + ": " + msg;
    throw ConfigError(e.rule(), msg);
  }
}

ProcessSpec build_process(const std::map<std::string, std::string>& eff) {
  auto get = [&](const std::string& k) { return eff.at(k); };
  auto real = [&](const std::string& k) {
    return with_path(k, [&] { return text::parse_real(get(k)); });
  };
  auto law = [&](const std::string& k) {
    return with_path(k, [&] { return ScalarLaw::parse(get(k)); });
  };
  ProcessSpec spec;
  const std::string family = get("process.family");
  spec.moment_order = real("process.moment_order");
  spec.scale = real("process.scale");
  spec.truncation_tol = real("tolerance.truncation");
  if (eff.count("process.window") && get("process.window") != "auto")
    spec.window = static_cast<int>(
        with_path("process.window", [&] { return text::parse_integer(get("process.window")); }));
  if (eff.count("process.innovation")) spec.innovation = law("process.innovation");

  if (family == "linear") {
    LinearFamily f;
    f.coefficients =
        with_path("process.coefficients", [&] { return parse_coefficients(get("process.coefficients")); });
    f.map = with_path("process.map", [&] { return parse_map(get("process.map")); });
    spec.family = f;
  } else if (family == "dyadic") {
    DyadicFamily f;
    const auto m = get("process.dyadic_map");
    if (m == "cosine")
      f.map = DyadicFamily::Map::cosine;
    else if (m == "indicator")
      f.map = DyadicFamily::Map::indicator;
    else
      throw ConfigError("syntax", "process.dyadic_map: expected cosine or indicator");
    f.bits = static_cast<int>(
        with_path("process.bits", [&] { return text::parse_integer(get("process.bits")); }));
    spec.family = f;
  } else if (family == "mdep-block") {
    MDepBlockFamily f;
    f.width = static_cast<int>(
        with_path("process.width", [&] { return text::parse_integer(get("process.width")); }));
    const auto m = get("process.block_map");
    if (m == "sum")
      f.map = MDepBlockFamily::Map::sum;
    else if (m == "product")
      f.map = MDepBlockFamily::Map::product;
    else
      throw ConfigError("syntax", "process.block_map: expected sum or product");
    spec.family = f;
  } else if (family == "recursion") {
    RecursionFamily f;
    f.a = law("process.a");
    f.b = law("process.b");
    f.independent = with_path("process.independent",
                              [&] { return text::parse_bool(get("process.independent")); });
    spec.family = f;
  } else if (family == "garch") {
    GarchFamily f;
    f.mu = real("process.mu");
    f.alpha = with_path("process.alpha", [&] { return text::parse_reals(get("process.alpha")); });
    f.beta = with_path("process.beta", [&] { return text::parse_reals(get("process.beta")); });
    spec.family = f;
  } else if (family == "volterra") {
    VolterraFamily f;
    f.max_order = static_cast<int>(
        with_path("process.order", [&] { return text::parse_integer(get("process.order")); }));
    f.max_lag = static_cast<int>(
        with_path("process.max_lag", [&] { return text::parse_integer(get("process.max_lag")); }));
    std::tie(f.c, f.rho) =
        with_path("process.kernel", [&] { return kernel_params(get("process.kernel")); });
    spec.family = f;
  } else {
    throw ConfigError("unknown-family", "process.family: unknown family '" + family + "'");
  }
  return spec;
}

ProcessSpec oracle_process() {
  ProcessSpec spec;
  spec.family = LinearFamily{CoefficientRule::explicit_list({1.0}), PostMap::identity()};
  spec.innovation = ScalarLaw::rademacher();
  return spec;
}

// Effective settings: defaults merged with the config, restricted to keys
// that apply. Unknown and inapplicable keys become violations.
std::map<std::string, std::string> effective_settings(const Config& config,
                                                      std::vector<Violation>& out,
                                                      ExperimentKind& kind) {
  kind = ExperimentKind::distance_report;
  try {
    kind = parse_experiment(config.get("experiment").value_or("distance-report"));
  } catch (const ConfigError& e) {
    out.push_back({e.rule(), "experiment", e.what()});
  }
  const std::string family = config.get("process.family").value_or("linear");
  std::map<std::string, std::string> eff;
  for (const auto& k : kSchema)
    if (applies(k, family, kind)) eff[k.key] = config.get(k.key).value_or(k.fallback);
  for (const auto& [key, value] : config.values()) {
    const KeySpec* spec = find_key(key);
    if (!spec)
      out.push_back({"unknown-key", key, "unknown configuration key"});
    else if (!applies(*spec, family, kind))
      out.push_back({"inapplicable-key", key,
                     "does not apply to family '" + family + "' and experiment '" +
                         to_string(kind) + "'"});
  }
  if (kind == ExperimentKind::oracle_check && !config.has("replications"))
    eff["replications"] = "100000";
  return eff;
}

void check_experiment(const ExperimentConfig& cfg, std::vector<Violation>& out) {
  auto add = [&](std::string rule, std::string path, std::string msg) {
    out.push_back({std::move(rule), std::move(path), std::move(msg)});
  };
  auto guard = [&](const std::string& path, const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      std::string msg = e.what();
      const std::string prefix = e.rule() + ": ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      add(e.rule(), path, msg);
    }
  };
  const long long R = cfg.integer("replications");
  const double p_avail = cfg.process.moment_order;
  std::optional<Process> process;
  if (cfg.kind != ExperimentKind::oracle_check) guard("process", [&] { process.emplace(cfg.process); });

  switch (cfg.kind) {
    case ExperimentKind::dependence_profile: {
      if (R < 100) add("replications", "replications", "dependence profiles need R >= 100");
      guard("dependence.p", [&] {
        const double p = cfg.real("dependence.p");
        if (!(p >= 1.0) || p > p_avail)
          add("moment-order", "dependence.p",
              "p = " + text::format_real(p) + " must lie in [1, process.moment_order]");
      });
      guard("dependence.lags", [&] {
        const auto lags = cfg.integers("dependence.lags");
        for (std::size_t i = 0; i < lags.size(); ++i) {
          if (process && (lags[i] < 0 || lags[i] > process->window()))
            add("lag-range", "dependence.lags",
                "lag " + std::to_string(lags[i]) + " outside [0, W] with W = " +
                    std::to_string(process->window()));
          if (i > 0 && lags[i] <= lags[i - 1])
            add("lag-range", "dependence.lags", "lags must be strictly increasing");
        }
      });
      break;
    }
    case ExperimentKind::variance_report: {
      if (R < 2) add("replications", "replications", "need R >= 2");
      guard("variance.max_lag", [&] {
        const long long K = cfg.integer("variance.max_lag");
        if (process && (K < 0 || K > 4LL * std::max(process->window(), 1)))
          add("max-lag", "variance.max_lag",
              "K must lie in [0, 4W] = [0, " +
                  std::to_string(4 * std::max(process->window(), 1)) + "]");
      });
      guard("variance.n", [&] {
        if (cfg.integer("variance.n") < 1) add("path-length", "variance.n", "n must be >= 1");
      });
      guard("variance.m", [&] {
        if (cfg.integer("variance.m") < 1) add("block-length", "variance.m", "m must be >= 1");
      });
      break;
    }
    case ExperimentKind::block_identities: {
      if (R < 2) add("replications", "replications", "need R >= 2");
      guard("blocks.redraws", [&] {
        if (cfg.integer("blocks.redraws") < 2)
          add("redraws", "blocks.redraws", "T must be >= 2");
      });
      guard("blocks", [&] {
        const long long n = cfg.integer("blocks.n");
        const double c0 = cfg.real("blocks.c0");
        const double p = cfg.real("blocks.p");
        if (!(p > 2.0 && p <= 3.0))
          add("moment-order", "blocks.p", "block theory needs p in (2, 3]");
        long long m = 0;
        if (const auto lam = cfg.optional("blocks.lambda")) {
          const double lambda = text::parse_real(*lam);
          const auto bad = validate_lambda(lambda, p);
          out.insert(out.end(), bad.begin(), bad.end());
          if (!bad.empty()) return;
          m = make_rate_plan(n, p, lambda, c0).m;
        } else {
          m = cfg.integer("blocks.m");
          const auto bad = validate_plan(n, m, c0);
          out.insert(out.end(), bad.begin(), bad.end());
          if (!bad.empty()) return;
        }
        if (process && process->depth() >= m) {
          bool close = false;
          if (process->linear_identity()) {
            double tail = 0.0;
            for (int i = static_cast<int>(m); i <= process->window(); ++i)
              tail += process->linear_coefficient(i) * process->linear_coefficient(i);
            close = std::sqrt(tail * cfg.process.innovation.variance()) <= 1e-6;
          }
          if (!close)
            add("not-m-dependent", "blocks.m",
                "process is not m-dependent at tolerance 1e-6 for m = " + std::to_string(m));
        }
      });
      break;
    }
    case ExperimentKind::distance_report: {
      if (R < static_cast<long long>(kMinDistanceSamples))
        add("replications", "replications", "distance reports need R >= 1000");
      guard("distance", [&] {
        if (cfg.integer("distance.n") < 1) add("path-length", "distance.n", "n must be >= 1");
        const double p = cfg.real("distance.p");
        if (!(p > 2.0) || p > p_avail)
          add("moment-order", "distance.p", "p must lie in (2, process.moment_order]");
        if (!(cfg.real("distance.q") >= 1.0)) add("lq-order", "distance.q", "q must be >= 1");
        for (double q : cfg.reals("distance.moments"))
          if (!(q > 0.0 && q < p))
            add("functional-order", "distance.moments", "moment orders need 0 < q < p");
        for (double x : cfg.reals("distance.tail_x"))
          if (!(x >= 0.0)) add("tail-threshold", "distance.tail_x", "thresholds must be >= 0");
      });
      break;
    }
    case ExperimentKind::rate_sweep: {
      if (R < static_cast<long long>(kMinDistanceSamples))
        add("replications", "replications", "rate sweeps need R >= 1000");
      guard("rate", [&] {
        const auto kind = parse_statistic(cfg.effective.at("rate.statistic"));
        const auto ns = cfg.integers("rate.n");
        for (std::size_t i = 0; i < ns.size(); ++i)
          if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1]))
            add("n-grid", "rate.n", "n grid must be positive and strictly increasing");
        const double p = cfg.real("rate.p");
        const double q = cfg.real("rate.q");
        if (!(p > 2.0) || p > p_avail)
          add("moment-order", "rate.p", "p must lie in (2, process.moment_order]");
        if (kind == StatisticKind::moment_gap && !(q > 0.0 && q < p))
          add("functional-order", "rate.q", "moment gap needs 0 < q < p");
        if (kind == StatisticKind::lq && !(q >= 1.0)) add("lq-order", "rate.q", "q must be >= 1");
        if (cfg.integer("rate.normalizer_replications") < 2)
          add("replications", "rate.normalizer_replications", "need >= 2");
        if (!(cfg.real("tolerance.slope") >= 0.0))
          add("slope-tolerance", "tolerance.slope", "tolerance must be >= 0");
      });
      break;
    }
    case ExperimentKind::oracle_check: {
      if (R < static_cast<long long>(kMinDistanceSamples))
        add("replications", "replications", "oracle checks need R >= 1000");
      guard("oracle.n", [&] {
        for (long long n : cfg.integers("oracle.n"))
          if (n < 1 || n > 40) add("oracle-size", "oracle.n", "oracle sizes must lie in [1, 40]");
      });
      break;
    }
  }
}

}  // namespace

bool is_gate_rule(const std::string& rule) {
  return rule == "block-plan-infeasible" || rule == "not-m-dependent" ||
         rule == "degenerate-variance" || rule == "burn-in";
}

double ExperimentConfig::real(const std::string& key) const {
  return with_path(key, [&] { return text::parse_real(effective.at(key)); });
}

long long ExperimentConfig::integer(const std::string& key) const {
  return with_path(key, [&] { return text::parse_integer(effective.at(key)); });
}

std::vector<long long> ExperimentConfig::integers(const std::string& key) const {
  return with_path(key, [&] { return text::parse_integers(effective.at(key)); });
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  return with_path(key, [&] { return text::parse_reals(effective.at(key)); });
}

std::optional<std::string> ExperimentConfig::optional(const std::string& key) const {
  const auto it = effective.find(key);
  if (it == effective.end() || it->second == "none" || it->second == "auto") return std::nullopt;
  return it->second;
}

std::string ExperimentConfig::echo() const {
  std::string out;
  for (const auto& [k, v] : effective) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(echo()); }

namespace {

// Builds the typed config; collects violations instead of throwing.
std::optional<ExperimentConfig> assemble(const Config& config, std::vector<Violation>& out) {
  ExperimentKind kind;
  auto eff = effective_settings(config, out, kind);
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.effective = std::move(eff);
  try {
    cfg.seed = Seed64{static_cast<std::uint64_t>(cfg.integer("seed"))};
    cfg.integer("replications");
  } catch (const ConfigError& e) {
    out.push_back({e.rule(), "seed/replications", e.what()});
    return std::nullopt;
  }
  if (kind == ExperimentKind::oracle_check) {
    cfg.process = oracle_process();
  } else {
    try {
      cfg.process = build_process(cfg.effective);
    } catch (const ConfigError& e) {
      out.push_back({e.rule(), "process", e.what()});
      return std::nullopt;
    }
    for (auto& v : validate_process(cfg.process)) out.push_back(std::move(v));
  }
  return cfg;
}

}  // namespace

std::vector<Violation> validate(const Config& config) {
  std::vector<Violation> out;
  auto cfg = assemble(config, out);
  if (cfg && out.empty()) check_experiment(*cfg, out);
  return out;
}

ExperimentConfig resolve(const Config& config) {
  std::vector<Violation> out;
  auto cfg = assemble(config, out);
  if (cfg && out.empty()) check_experiment(*cfg, out);
  if (!out.empty()) {
    const auto& v = out.front();
    if (is_gate_rule(v.rule)) throw GateError(v.rule, v.path + ": " + v.message);
    throw ConfigError(v.rule, v.path + ": " + v.message);
  }
  return *cfg;
}

Config oracle_config() {
  Config c;
  c.set("experiment", "oracle-check");
  c.set("seed", "20261015");
  c.set("replications", "100000");
  c.set("oracle.n", "4,16,36");
  return c;
}

namespace {

json estimate_json(const numeric::Estimate& e) { return json{{"value", e.value}, {"se", e.se}}; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

struct ExperimentResult {
  json results;
  std::map<std::string, std::string> csv;
  int exit_code = exit_ok;
  std::string summary;
};

ExperimentResult run_dependence(const ExperimentConfig& cfg, const Process& process,
                                const Executor& ex) {
  std::vector<int> lags;
  for (long long l : cfg.integers("dependence.lags")) lags.push_back(static_cast<int>(l));
  const auto profile = dependence_profile(process, cfg.real("dependence.p"), lags,
                                          static_cast<std::size_t>(cfg.integer("replications")),
                                          cfg.seed, ex);
  std::optional<DecayFit> fit;
  try {
    fit = decay_fit(profile);
  } catch (const ConfigError&) {
  }
  ExperimentResult r;
  r.results["p"] = profile.p;
  r.results["replications"] = profile.replications;
  r.results["lags"] = profile.lags;
  r.results["delta_hat"] = profile.delta_hat;
  r.results["se"] = profile.se;
  r.results["weighted_partial"] = profile.weighted_partial;
  if (fit) {
    r.results["fit"] = {{"class", to_string(fit->kind)},
                        {"parameter", fit->parameter},
                        {"goodness", fit->goodness},
                        {"extrapolated_tail", finite_or_null(fit->extrapolated_tail)}};
  } else {
    r.results["fit"] = nullptr;
  }
  if (profile.lags.size() >= 5) {
    const auto s = summability_report(profile, fit);
    r.results["summability"] = {{"verdict", to_string(s.verdict)},
                                {"partial_sum", s.partial_sum},
                                {"tail", finite_or_null(s.tail)}};
    r.summary = "summability: " + to_string(s.verdict);
  } else {
    r.summary = "profile with " + std::to_string(profile.lags.size()) + " lags";
  }
  r.csv["dependence.csv"] = profile_csv(profile);
  return r;
}

ExperimentResult run_variance(const ExperimentConfig& cfg, const Process& process,
                              const Executor& ex) {
  const auto rep = variance_report(process, static_cast<int>(cfg.integer("variance.max_lag")),
                                   cfg.integer("variance.n"), cfg.integer("variance.m"),
                                   static_cast<std::size_t>(cfg.integer("replications")),
                                   cfg.seed, ex);
  ExperimentResult r;
  r.results["source"] = to_string(rep.table.source);
  r.results["gamma"] = rep.table.gamma;
  r.results["se"] = rep.table.se;
  r.results["s2"] = rep.long_run.s2;
  r.results["s2_se"] = rep.long_run.se;
  r.results["n"] = rep.n;
  r.results["s2_n"] = rep.finite.direct;
  r.results["s2_n_identity_minus"] = rep.finite.identity_minus;
  r.results["s2_n_identity_plus"] = rep.finite.identity_plus;
  r.results["reconciling_sign"] = rep.finite.reconciling_sign;
  r.results["m"] = rep.m;
  r.results["s2_m"] = rep.sigma_hat.s2_m;
  r.results["sigma_hat2_m"] = rep.sigma_hat.double_sum;
  r.results["sigma_hat2_m_identity"] = rep.sigma_hat.identity;
  r.results["sigma_hat2_m_residual"] = rep.sigma_hat.residual;
  r.csv["autocovariance.csv"] = autocovariance_csv(rep.table);
  r.summary = "s2 = " + text::format_real(rep.long_run.s2) +
              ", reconciling sign: " + rep.finite.reconciling_sign;
  return r;
}

ExperimentResult run_blocks(const ExperimentConfig& cfg, const Process& process,
                            const Executor& ex) {
  const long long n = cfg.integer("blocks.n");
  const double c0 = cfg.real("blocks.c0");
  BlockPlan plan;
  if (const auto lam = cfg.optional("blocks.lambda"))
    plan = make_rate_plan(n, cfg.real("blocks.p"), text::parse_real(*lam), c0);
  else
    plan = make_plan(n, cfg.integer("blocks.m"), c0);
  const auto d = decompose(process, plan, static_cast<std::size_t>(cfg.integer("replications")),
                           static_cast<int>(cfg.integer("blocks.redraws")), cfg.seed, ex);
  ExperimentResult r;
  r.results["plan"] = {{"n", plan.n}, {"m", plan.m}, {"N", plan.N}, {"m_prime", plan.m_prime},
                       {"c0", plan.c0}};
  if (plan.lambda) r.results["plan"]["lambda"] = *plan.lambda;
  r.results["s2_nm"] = estimate_json(d.s2_nm);
  r.results["sigma_bar2"] = estimate_json(d.sigma_bar2);
  r.results["varsigma_bar2"] = estimate_json(d.varsigma_bar2);
  r.results["identity_residual"] = estimate_json(d.residual);
  const bool within = std::abs(d.residual.value) <= 3.0 * d.residual.se;
  r.results["identity_within_3se"] = within;
  r.results["max_additivity_error"] = d.max_additivity_error;
  r.results["adjacent_correlation"] = d.adjacent_correlation;
  json sj = json::array();
  for (const auto& e : d.sigma_j2) sj.push_back(estimate_json(e));
  r.results["sigma_j2"] = sj;
  r.csv["blocks.csv"] = block_variance_csv(d);
  r.summary = std::string("block identity residual ") +
              (within ? "within" : "outside") + " 3 SE";
  return r;
}

void gate_long_run(const Process& process, Seed64 seed, const Executor& ex) {
  const int K = std::min(4 * std::max(process.window(), 1), 64);
  long_run_variance(autocovariance(process, K, 20000, derive_seed(seed, 0x6a7e), ex));
}

ExperimentResult run_distance(const ExperimentConfig& cfg, const Process& process,
                              const Executor& ex) {
  gate_long_run(process, cfg.seed, ex);
  const auto n = static_cast<std::size_t>(cfg.integer("distance.n"));
  const auto R = static_cast<std::size_t>(cfg.integer("replications"));
  const auto norm = finite_variance_normalizer(process, static_cast<long long>(n), 20000,
                                               derive_seed(cfg.seed, 0x4e0), ex);
  const auto samples =
      standardize(sample_sums(process, n, R, cfg.seed, ex), n, norm.value, norm.source);
  DistanceOptions opt;
  opt.p = cfg.real("distance.p");
  opt.q = cfg.real("distance.q");
  opt.moment_qs = cfg.reals("distance.moments");
  opt.tail_xs = cfg.reals("distance.tail_x");
  const auto rep = distance_report(samples, opt);

  ExperimentResult r;
  r.results["n"] = rep.n;
  r.results["replications"] = rep.replications;
  r.results["normalizer"] = {{"source", rep.normalizer_source}, {"value", rep.normalizer}};
  r.results["kolmogorov"] = {{"distance", rep.kolmogorov.distance},
                             {"location", rep.kolmogorov.location},
                             {"dkw", rep.kolmogorov.dkw}};
  r.results["lq"] = {{"q", rep.lq.q},
                     {"integral", rep.lq.integral},
                     {"l1", rep.lq.l1},
                     {"quadrature_tol", rep.lq.quadrature_tol},
                     {"bound", rep.lq.bound},
                     {"bound_holds", rep.lq.bound_holds}};
  r.results["nonuniform"] = {
      {"p", rep.nonuniform.p}, {"max", rep.nonuniform.max}, {"argmax", rep.nonuniform.argmax}};
  json gaps = json::array();
  for (const auto& [q, g] : rep.moment_gaps)
    gaps.push_back({{"q", q},
                    {"sample_mean", g.sample_mean},
                    {"se", g.sample_se},
                    {"gaussian", g.gaussian},
                    {"gap", g.gap}});
  r.results["moment_gaps"] = gaps;
  json tails = json::array();
  for (const auto& row : rep.tails.rows)
    tails.push_back({{"x", row.x},
                     {"probability", row.probability},
                     {"se", row.se},
                     {"gaussian", row.gaussian}});
  r.results["tails"] = tails;
  r.results["tail_log_slope"] =
      rep.tails.log_slope ? json(*rep.tails.log_slope) : json(nullptr);
  r.csv["nonuniform.csv"] = nonuniform_csv(rep.nonuniform);
  r.csv["tails.csv"] = tail_csv(rep.tails);
  r.summary = "kolmogorov distance " + text::format_real(rep.kolmogorov.distance) +
              " (dkw " + text::format_real(rep.kolmogorov.dkw) + ")";
  return r;
}

ExperimentResult run_rates(const ExperimentConfig& cfg, const Process& process,
                           const Executor& ex) {
  const auto kind = parse_statistic(cfg.effective.at("rate.statistic"));
  std::vector<std::size_t> grid;
  for (long long n : cfg.integers("rate.n")) grid.push_back(static_cast<std::size_t>(n));
  SweepOptions opt;
  opt.p = cfg.real("rate.p");
  opt.q = cfg.real("rate.q");
  opt.normalizer_replications =
      static_cast<std::size_t>(cfg.integer("rate.normalizer_replications"));
  auto series = rate_sweep(process, kind, grid,
                           static_cast<std::size_t>(cfg.integer("replications")), cfg.seed,
                           opt, ex);
  FitOptions fo;
  fo.tolerance = cfg.real("tolerance.slope");
  fo.seed = derive_seed(cfg.seed, 0xb007);
  const auto fit = fit_rate(series, fo);

  ExperimentResult r;
  r.results["statistic"] = to_string(kind);
  json pts = json::array();
  for (const auto& p : series.points)
    pts.push_back(
        {{"n", p.n}, {"value", p.value}, {"se", p.se}, {"floor", p.floor}, {"used", p.used}});
  r.results["points"] = pts;
  r.results["fit"] = {{"fitted", fit.fitted},
                      {"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"ci_low", fit.ci_low},
                      {"ci_high", fit.ci_high},
                      {"theoretical", fit.theoretical},
                      {"tolerance", fit.tolerance},
                      {"used_points", fit.used_points},
                      {"verdict", to_string(fit.verdict)}};
  r.csv["rate.csv"] = rate_csv(series);
  if (fit.verdict == Verdict::underpowered) r.exit_code = exit_underpowered;
  r.summary = "rate verdict: " + to_string(fit.verdict) +
              (fit.fitted ? ", slope " + text::format_real(fit.slope) : "");
  return r;
}

ExperimentResult run_oracle(const ExperimentConfig& cfg, const Process& process,
                            const Executor& ex) {
  const auto R = static_cast<std::size_t>(cfg.integer("replications"));
  ExperimentResult r;
  json rows = json::array();
  std::string csv = "n,exact,empirical,dkw,pass\n";
  bool all = true;
  for (long long n : cfg.integers("oracle.n")) {
    const double exact = exact_kolmogorov_rademacher(static_cast<int>(n));
    const auto nn = static_cast<std::size_t>(n);
    const auto samples = standardize(
        sample_sums(process, nn, R, derive_seed(cfg.seed, nn), ex), nn, 1.0, "analytic-sn2");
    const auto emp = empirical_kolmogorov(samples);
    const bool pass = std::abs(emp.distance - exact) <= emp.dkw;
    all = all && pass;
    rows.push_back({{"n", n},
                    {"exact", exact},
                    {"empirical", emp.distance},
                    {"dkw", emp.dkw},
                    {"pass", pass}});
    csv += std::to_string(n) + "," + text::format_real(exact) + "," +
           text::format_real(emp.distance) + "," + text::format_real(emp.dkw) + "," +
           (pass ? "1" : "0") + "\n";
  }
  r.results["rows"] = rows;
  r.results["all_pass"] = all;
  r.csv["oracle.csv"] = csv;
  r.exit_code = all ? exit_ok : exit_failed_check;
  r.summary = all ? "oracle agreement within DKW at every n" : "oracle disagreement";
  return r;
}

}  // namespace

RunOutcome run(const Config& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  ExperimentConfig cfg;
  {
    const auto violations = validate(config);
    if (!violations.empty()) {
      bool gate_only = true;
      std::string lines;
      for (const auto& v : violations) {
        gate_only = gate_only && is_gate_rule(v.rule);
        lines += (lines.empty() ? "" : "\n") + v.rule + ": " + v.path + ": " + v.message;
      }
      outcome.exit_code = gate_only ? exit_gate : exit_validation;
      outcome.summary = lines;
      return outcome;
    }
    cfg = resolve(config);
  }
  try {
    const Executor ex(options.workers);
    const Process process(cfg.process);
    check_burn_in(cfg.process, 2000, derive_seed(cfg.seed, 0xb0));
    ExperimentResult res;
    switch (cfg.kind) {
      case ExperimentKind::dependence_profile: res = run_dependence(cfg, process, ex); break;
      case ExperimentKind::variance_report: res = run_variance(cfg, process, ex); break;
      case ExperimentKind::block_identities: res = run_blocks(cfg, process, ex); break;
      case ExperimentKind::distance_report: res = run_distance(cfg, process, ex); break;
      case ExperimentKind::rate_sweep: res = run_rates(cfg, process, ex); break;
      case ExperimentKind::oracle_check: res = run_oracle(cfg, process, ex); break;
    }

    std::filesystem::create_directories(options.out_dir);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
    json report;
    report["version"] = kVersion;
    report["config_hash"] = hash;
    report["experiment"] = to_string(cfg.kind);
    report["config"] = cfg.effective;
    report["results"] = res.results;
    write_file(options.out_dir / "report.json", report.dump(2) + "\n");
    write_file(options.out_dir / "config.echo", cfg.echo());
    for (const auto& [name, body] : res.csv) write_file(options.out_dir / name, body);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json meta{{"version", kVersion},
              {"config_hash", hash},
              {"workers", options.workers},
              {"wall_seconds", wall}};
    write_file(options.out_dir / "run_meta.json", meta.dump(2) + "\n");
    outcome.exit_code = res.exit_code;
    outcome.summary = res.summary;
  } catch (const GateError& e) {
    outcome.exit_code = exit_gate;
    outcome.summary = e.what();
  } catch (const ConfigError& e) {
    outcome.exit_code = exit_validation;
    outcome.summary = e.what();
  }
  return outcome;
}

}  // namespace shiftlab
