// experiments.cpp

#include "incstat/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "incstat/errors.hpp"
#include "incstat/green.hpp"
#include "incstat/parallel.hpp"
#include "incstat/pointsets.hpp"
#include "incstat/randfields.hpp"
#include "incstat/rng.hpp"

namespace incstat {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kRequired = "\x01required";

using Schema = std::map<std::string, std::string>;

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s = {
      {"green",
       {{"schema_version", kRequired}, {"seed", "1"}, {"d", kRequired}, {"L", kRequired}, {"mu", kRequired},
        {"p", "1,2"}}},
      {"covariance",
       {{"schema_version", kRequired},
        {"seed", "1"},
        {"d", kRequired},
        {"L", kRequired},
        {"generator", kRequired},
        {"law", "uniform_centered"},
        {"law_param", "1"},
        {"alpha", "3"},
        {"axis", "0"},
        {"samples", "50"},
        {"lags", "1:8"}}},
      {"corrector-scaling",
       {{"schema_version", kRequired},
        {"seed", "1"},
        {"d", kRequired},
        {"generator", kRequired},
        {"law", "uniform_centered"},
        {"law_param", "1"},
        {"alpha", "3"},
        {"axis", "0"},
        {"mu_max", "0.25"},
        {"mu_min", "0.000244140625"},
        {"mu_points", "6"},
        {"mu_list", ""},
        {"n", "200"},
        {"l_factor", "8"},
        {"l_min", "8"},
        {"l_cap", ""},
        {"memory_budget_mb", "4000"}}},
      {"energy",
       {{"schema_version", kRequired},
        {"seed", "1"},
        {"d", "1"},
        {"generator", kRequired},
        {"tau", "uniform"},
        {"tau_a", "0.5"},
        {"tau_b", "1.5"},
        {"amplitude", "0.3"},
        {"potential", "indicator"},
        {"cutoff", "2"},
        {"box_sizes", kRequired},
        {"seeds", "8"},
        {"shift", "1000"},
        {"export_points", "false"}}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Wraps a typed-conversion failure as a field-level config error.
template <class Fn>
auto field(const std::string& key, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << content;
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::string csv_header(const ExperimentConfig& cfg) {
  std::string h = "# incstat " + cfg.subcommand + "\n";
  std::istringstream is(cfg.serialize());
  std::string line;
  while (std::getline(is, line)) h += "# " + line + "\n";
  return h;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["subcommand"] = cfg.subcommand;
  json v = json::object();
  for (const auto& [k, val] : cfg.values) v[k] = val;
  j["values"] = v;
  j["text"] = cfg.text;
  return j;
}

GeneratorSpec generator_from(const ExperimentConfig& cfg, int d) {
  GeneratorSpec g;
  g.kind = field("generator", [&] { return parse_generator(cfg.get("generator")); });
  g.axis = static_cast<int>(cfg.get_int("axis"));
  if (g.axis < 0 || g.axis >= d) throw ConfigError("axis", "must lie in [0, d)");
  if (g.kind == GeneratorKind::iid || g.kind == GeneratorKind::gradient) {
    g.law = field("law", [&] { return parse_law(cfg.get("law"), cfg.get_double("law_param")); });
  }
  if (g.kind == GeneratorKind::decay_alpha) {
    g.alpha = cfg.get_double("alpha");
    if (!(g.alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  }
  if (g.kind == GeneratorKind::gff && d != 2) throw ConfigError("generator", "gff requires d = 2");
  return g;
}

int dim_from(const ExperimentConfig& cfg) {
  const auto d = cfg.get_int("d");
  if (d < 1 || d > 3) throw ConfigError("d", "must be 1, 2 or 3");
  return static_cast<int>(d);
}

std::vector<Site> parse_lags(const std::string& text, int d) {
  std::vector<Site> lags;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const long a = std::stol(text.substr(0, colon));
    const long b = std::stol(text.substr(colon + 1));
    if (a < 0 || b < a) throw std::invalid_argument("lag range must be 'a:b' with 0 <= a <= b");
    for (long k = a; k <= b; ++k) lags.push_back(Site{k, 0, 0});
    return lags;
  }
  std::istringstream is(text);
  std::string vec;
  while (std::getline(is, vec, ';')) {
    std::istringstream vs(vec);
    std::string c;
    Site k{};
    int n = 0;
    while (std::getline(vs, c, ',')) {
      if (n >= d) throw std::invalid_argument("lag '" + vec + "' has more than d coordinates");
      k[n++] = std::stol(trim(c));
    }
    if (n != d) throw std::invalid_argument("lag '" + vec + "' needs exactly d coordinates");
    lags.push_back(k);
  }
  if (lags.empty()) throw std::invalid_argument("no lags given");
  return lags;
}

// --------------------------------------------------------------- green

RunResult run_green(const ExperimentConfig& cfg, const RunOptions& opts) {
  const int d = dim_from(cfg);
  const auto L = cfg.get_int("L");
  if (L < 2) throw ConfigError("L", "must be >= 2");
  const double mu = cfg.get_double("mu");
  if (!(mu > 0.0)) throw ConfigError("mu", "must be positive");
  const auto ps = cfg.get_doubles("p");
  if (ps.empty()) throw ConfigError("p", "needs at least one exponent");
  for (double p : ps) {
    if (!(p >= 1.0 && p <= 4.0)) throw ConfigError("p", "exponents must lie in [1, 4]");
  }
  const TorusGeometry g(d, L);
  if (std::ldexp(1.0, 3) > static_cast<double>(L) / 2.0) {
    throw ConfigError("L", "needs L >= 16 for three dyadic annuli");
  }

  const GreenTable table = green_torus(mu, g);
  std::string csv = csv_header(cfg) + "p,annulus,r_lo,r_hi,sites,sum\n";
  json summary;
  summary["kind"] = "green";
  summary["config"] = config_json(cfg);
  summary["d"] = d;
  summary["L"] = L;
  summary["mu"] = mu;
  summary["residual_max"] = table.residual_max;
  summary["wrap_estimate"] = table.wrap_estimate;
  double site_sum = 0.0;
  for (double v : table.values.values()) site_sum += v;
  summary["site_sum"] = site_sum;
  summary["site_sum_expected"] = 1.0 / mu;
  summary["G0"] = table.at(0);
  summary["grad_max"] = grad_green_max(table);
  json l2 = json::array();
  for (int a = 0; a < d; ++a) l2.push_back(grad_green_l2(mu, g, a));
  summary["grad_l2"] = l2;
  json dy = json::array();
  for (double p : ps) {
    const DyadicReport rep = dyadic_gradient_norms(table, p);
    for (const auto& a : rep.annuli) {
      csv += num(p) + "," + std::to_string(a.index) + "," + num(std::ldexp(1.0, a.index)) + "," +
             num(std::ldexp(1.0, a.index + 1)) + "," + std::to_string(a.sites) + "," + num(a.sum) + "\n";
    }
    json e;
    e["p"] = p;
    e["slope"] = rep.slope;
    e["expected_slope"] = d + p * (1.0 - d);
    e["tolerance"] = 0.3;
    e["within_tolerance"] = std::abs(rep.slope - (d + p * (1.0 - d))) <= 0.3;
    dy.push_back(e);
  }
  summary["dyadic"] = dy;

  RunResult res;
  const fs::path csv_path = opts.out_dir / "green_annuli.csv";
  const fs::path json_path = opts.out_dir / "green_summary.json";
  write_file(csv_path, csv);
  write_file(json_path, summary.dump(2) + "\n");
  res.artifacts = {csv_path, json_path};
  return res;
}

// ----------------------------------------------------------- covariance

RunResult run_covariance(const ExperimentConfig& cfg, const RunOptions& opts) {
  const int d = dim_from(cfg);
  const auto L = cfg.get_int("L");
  if (L < 2) throw ConfigError("L", "must be >= 2");
  const GeneratorSpec gen = generator_from(cfg, d);
  const auto samples = cfg.get_int("samples");
  if (samples < 2) throw ConfigError("samples", "needs at least 2 samples");
  const auto lags = field("lags", [&] { return parse_lags(cfg.get("lags"), d); });
  const std::uint64_t seed = cfg.get_u64("seed");
  const TorusGeometry g(d, L);

  std::vector<IncrementSample> zs(static_cast<std::size_t>(samples));
  parallel_for(zs.size(), opts.threads, [&](std::size_t r) {
    try {
      zs[r] = generate(gen, g, derive_seed(seed, {r}));
    } catch (const std::exception& e) {
      throw GeneratorError(r, e.what());
    }
  });
  const CovarianceEstimate est = empirical_covariance(zs, lags);

  std::string csv = csv_header(cfg);
  for (int a = 0; a < d; ++a) csv += "lag" + std::to_string(a) + ",";
  csv += "l,lp,n,cov,stderr\n";
  for (const auto& e : est.entries) {
    for (int a = 0; a < d; ++a) csv += std::to_string(e.lag[a]) + ",";
    csv += std::to_string(e.l) + "," + std::to_string(e.lp) + "," + std::to_string(e.n) + "," + num(e.cov) + "," +
           num(e.stderr_) + "\n";
  }

  double clamped = 0.0;
  bool warn = false;
  for (const auto& z : zs) {
    clamped = std::max(clamped, z.clamped_mass);
    warn = warn || z.clamp_warning;
  }
  json summary;
  summary["kind"] = "covariance";
  summary["config"] = config_json(cfg);
  summary["d"] = d;
  summary["generator"] = gen.describe();
  summary["samples"] = samples;
  if (est.alpha) {
    summary["alpha"] = *est.alpha;
    summary["alpha_ci"] = {*est.alpha - est.alpha_halfwidth, *est.alpha + est.alpha_halfwidth};
  } else {
    summary["alpha"] = "indeterminate";
  }
  summary["fit_points"] = est.fit_points;
  summary["clamped_mass"] = clamped;
  summary["clamp_warning"] = warn;

  RunResult res;
  const fs::path csv_path = opts.out_dir / "covariance.csv";
  const fs::path json_path = opts.out_dir / "covariance_summary.json";
  write_file(csv_path, csv);
  write_file(json_path, summary.dump(2) + "\n");
  res.artifacts = {csv_path, json_path};
  return res;
}

// ------------------------------------------------------ corrector scaling

json scaling_json(const ScalingReport& rep) {
  json j;
  j["generator"] = rep.generator;
  j["d"] = rep.d;
  j["seed"] = rep.seed;
  json rule;
  rule["factor"] = rep.rule.factor;
  rule["min_side"] = rep.rule.min_side;
  if (rep.rule.cap) {
    rule["cap"] = *rep.rule.cap;
  } else {
    rule["cap"] = nullptr;
  }
  j["side_rule"] = rule;
  json pts = json::array();
  std::size_t violations = 0;
  for (const auto& p : rep.points) {
    json e;
    e["mu"] = p.mu;
    e["mean"] = p.mean;
    e["stderr"] = p.stderr_;
    e["L"] = p.L;
    e["n"] = p.n;
    e["capped"] = p.capped;
    e["energy_violations"] = p.energy_violations;
    e["max_energy_excess"] = p.max_energy_excess;
    if (p.psi_second_moment) {
      e["psi_second_moment"] = *p.psi_second_moment;
      e["gradient_mismatch"] = *p.gradient_mismatch;
      e["psi_bound_violations"] = p.psi_bound_violations;
    }
    violations += p.energy_violations;
    pts.push_back(e);
  }
  j["points"] = pts;
  json fit;
  fit["valid"] = rep.fits_valid;
  fit["loglog_slope"] = rep.loglog.slope;
  fit["loglog_r2"] = rep.loglog.r2;
  fit["loglinear_slope"] = rep.loglinear.slope;
  fit["loglinear_r2"] = rep.loglinear.r2;
  fit["boundedness_ratio"] = rep.boundedness_ratio;
  j["fit"] = fit;
  j["energy_violations"] = violations;
  j["verdict"] = to_string(rep.verdict);
  return j;
}

RunResult run_scaling(const ExperimentConfig& cfg, const RunOptions& opts) {
  const ScalingConfig sc = scaling_config_from(cfg, opts.threads);
  validate_scaling_config(sc);
  const ScalingReport rep = scaling_study(sc);

  std::string csv = csv_header(cfg) + "mu,mean,stderr,L,n\n";
  for (const auto& p : rep.points) {
    csv += num(p.mu) + "," + num(p.mean) + "," + num(p.stderr_) + "," + std::to_string(p.L) + "," +
           std::to_string(p.n) + "\n";
  }
  json j;
  j["kind"] = "scaling";
  j["config"] = config_json(cfg);
  j["report"] = scaling_json(rep);

  RunResult res;
  const fs::path csv_path = opts.out_dir / "scaling.csv";
  const fs::path json_path = opts.out_dir / "scaling_report.json";
  write_file(csv_path, csv);
  write_file(json_path, j.dump(2) + "\n");
  res.artifacts = {csv_path, json_path};
  res.summary = "verdict: " + verdict_sentence(rep.verdict);
  return res;
}

// ---------------------------------------------------------------- energy

RunResult run_energy(const ExperimentConfig& cfg, const RunOptions& opts) {
  PointGenerator gen;
  gen.d = dim_from(cfg);
  const std::string kind = cfg.get("generator");
  if (kind == "renewal") {
    gen.kind = PointGeneratorKind::renewal;
    if (gen.d != 1) throw ConfigError("d", "renewal point sets need d = 1");
    gen.tau = field("tau", [&] { return parse_tau_law(cfg.get("tau"), cfg.get_double("tau_a"), cfg.get_double("tau_b")); });
  } else if (kind == "integer_lattice") {
    gen.kind = PointGeneratorKind::integer_lattice;
  } else if (kind == "perturbed_lattice") {
    gen.kind = PointGeneratorKind::perturbed_lattice;
    gen.amplitude = cfg.get_double("amplitude");
    if (!(gen.amplitude >= 0.0 && gen.amplitude < 0.5)) throw ConfigError("amplitude", "must lie in [0, 1/2)");
  } else {
    throw ConfigError("generator", "unknown point generator '" + kind + "'");
  }
  const Potential V = field("potential", [&] { return parse_potential(cfg.get("potential"), cfg.get_double("cutoff")); });
  const auto sizes = cfg.get_doubles("box_sizes");
  if (sizes.size() < 3) throw ConfigError("box_sizes", "needs at least 3 sizes");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (!(sizes[j] > 0.0) || (j > 0 && !(sizes[j] > sizes[j - 1]))) {
      throw ConfigError("box_sizes", "must be positive and strictly increasing");
    }
  }
  const auto seeds = cfg.get_int("seeds");
  if (seeds < 8) throw ConfigError("seeds", "needs at least 8 seeds");
  const auto shift = cfg.get_int("shift");
  const std::string exp = cfg.get("export_points");
  if (exp != "true" && exp != "false") throw ConfigError("export_points", "must be true or false");
  const std::uint64_t seed = cfg.get_u64("seed");

  const DensityStudy study = thermodynamic_density(gen, V, sizes, static_cast<std::size_t>(seeds), seed, shift,
                                                   opts.threads);

  std::string csv = csv_header(cfg) + "N,seed,energy,density,shifted_density\n";
  for (const auto& row : study.rows) {
    double vol = 1.0;
    for (int a = 0; a < gen.d; ++a) vol *= row.N;
    for (std::size_t s = 0; s < row.densities.size(); ++s) {
      csv += num(row.N) + "," + std::to_string(s) + "," + num(row.densities[s] * vol) + "," + num(row.densities[s]) +
             "," + num(row.shifted_densities[s]) + "\n";
    }
  }
  json j;
  j["kind"] = "energy";
  j["config"] = config_json(cfg);
  j["d"] = gen.d;
  j["generator"] = gen.describe();
  j["potential"] = V.describe();
  json rows = json::array();
  for (const auto& row : study.rows) {
    json r;
    r["N"] = row.N;
    r["mean"] = row.mean;
    r["spread"] = row.spread;
    r["shifted_mean"] = row.shifted_mean;
    r["shifted_spread"] = row.shifted_spread;
    r["shift_agrees"] = row.shift_agrees;
    rows.push_back(r);
  }
  j["rows"] = rows;
  j["spread_decreasing"] = study.spread_decreasing;
  j["invariance_checked"] = study.invariance_checked;
  j["invariance_holds"] = study.invariance_holds;
  j["shift"] = study.shift;

  RunResult res;
  const fs::path csv_path = opts.out_dir / "energy.csv";
  const fs::path json_path = opts.out_dir / "energy_summary.json";
  write_file(csv_path, csv);
  write_file(json_path, j.dump(2) + "\n");
  res.artifacts = {csv_path, json_path};
  if (exp == "true") {
    const double margin = V.cutoff + 1.0;
    const PointSetWindow set =
        gen.sample(Box::cube(gen.d, -margin, sizes.back() + margin), derive_seed(seed, {0}), 0);
    std::ostringstream os;
    write_points_csv(os, set);
    const fs::path pts = opts.out_dir / "points_seed0.csv";
    write_file(pts, os.str());
    res.artifacts.push_back(pts);
  }
  return res;
}

}  // namespace

// ------------------------------------------------------------ config

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError(key, "missing");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an unsigned integer, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError(key, "expected an unsigned integer, got '" + s + "'");
  return v;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream is(get(key));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a comma-separated list of numbers");
    }
    if (pos != item.size() || !std::isfinite(v)) throw ConfigError(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::string s;
  for (const auto& [k, v] : values) s += k + " = " + v + "\n";
  return s;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"green", "covariance", "corrector-scaling", "energy", "report"};
  return s;
}

ExperimentConfig parse_config(const std::string& subcommand, const std::string& text,
                              std::optional<std::uint64_t> seed_override) {
  auto sit = schemas().find(subcommand);
  if (sit == schemas().end()) throw ConfigError("subcommand", "'" + subcommand + "' takes no config");
  const Schema& schema = sit->second;

  ExperimentConfig cfg;
  cfg.subcommand = subcommand;
  cfg.text = text;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!schema.count(key)) throw ConfigError(key, "unknown key for '" + subcommand + "'");
    if (cfg.values.count(key)) throw ConfigError(key, "given more than once");
    cfg.values[key] = value;
  }
  for (const auto& [key, def] : schema) {
    if (cfg.values.count(key)) continue;
    if (def == kRequired) throw ConfigError(key, "required key is missing");
    cfg.values[key] = def;
  }
  if (cfg.get_int("schema_version") != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  if (seed_override) cfg.values["seed"] = std::to_string(*seed_override);
  cfg.get_u64("seed");
  return cfg;
}

ScalingConfig scaling_config_from(const ExperimentConfig& cfg, int threads) {
  ScalingConfig sc;
  sc.d = dim_from(cfg);
  sc.generator = generator_from(cfg, sc.d);
  if (!cfg.get("mu_list").empty()) {
    sc.mu_grid = cfg.get_doubles("mu_list");
  } else {
    const auto points = cfg.get_int("mu_points");
    if (points < 2) throw ConfigError("mu_points", "a mu-grid needs at least 5 points");
    sc.mu_grid = field("mu_max", [&] {
      return geometric_grid(cfg.get_double("mu_max"), cfg.get_double("mu_min"), static_cast<std::size_t>(points));
    });
  }
  if (sc.mu_grid.size() < 5) throw ConfigError("mu_grid", "needs at least 5 points");
  if (!is_geometric(sc.mu_grid)) throw ConfigError("mu_list", "must be a geometric sequence of positive values");
  const auto n = cfg.get_int("n");
  if (n < 2) throw ConfigError("n", "needs at least 2 realizations");
  sc.n = static_cast<std::size_t>(n);
  sc.seed = cfg.get_u64("seed");
  sc.rule.factor = cfg.get_double("l_factor");
  sc.rule.min_side = cfg.get_int("l_min");
  if (!cfg.get("l_cap").empty()) sc.rule.cap = cfg.get_int("l_cap");
  sc.rule.memory_budget_bytes = cfg.get_double("memory_budget_mb") * 1e6;
  if (!(sc.rule.memory_budget_bytes > 0.0)) throw ConfigError("memory_budget_mb", "must be positive");
  sc.threads = threads;
  return sc;
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.threads < 1) throw ConfigError("threads", "must be >= 1");
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + opts.out_dir.string() + "': " + ec.message());
  if (cfg.subcommand == "green") return run_green(cfg, opts);
  if (cfg.subcommand == "covariance") return run_covariance(cfg, opts);
  if (cfg.subcommand == "corrector-scaling") return run_scaling(cfg, opts);
  if (cfg.subcommand == "energy") return run_energy(cfg, opts);
  throw ConfigError("subcommand", "unknown subcommand '" + cfg.subcommand + "'");
}

std::string verdict_sentence(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded (stationary up to translation)";
    case Verdict::diverging_powerlaw: return "diverging-powerlaw (not stationary up to translation)";
    case Verdict::diverging_log: return "diverging-log (not stationary up to translation)";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string report(const std::vector<fs::path>& artifacts) {
  if (artifacts.empty()) {
    throw std::invalid_argument("usage: incstat report <artifact.json>...");
  }
  std::map<int, std::vector<std::string>> by_dim;
  for (const auto& path : artifacts) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read artifact '" + path.string() + "'");
    json j;
    try {
      j = json::parse(is);
    } catch (const std::exception& e) {
      throw IoError("corrupt artifact '" + path.string() + "': " + e.what());
    }
    try {
      const std::string kind = j.at("kind").get<std::string>();
      std::ostringstream os;
      os.precision(6);
      if (kind == "scaling") {
        const json& r = j.at("report");
        const Verdict v = parse_verdict(r.at("verdict").get<std::string>());
        const json& f = r.at("fit");
        os << "corrector-scaling " << r.at("generator").get<std::string>() << "\n"
           << "  log-log slope " << f.at("loglog_slope").get<double>() << " (R^2 " << f.at("loglog_r2").get<double>()
           << "), |ln mu| slope " << f.at("loglinear_slope").get<double>() << " (R^2 "
           << f.at("loglinear_r2").get<double>() << "), boundedness ratio " << f.at("boundedness_ratio").get<double>()
           << "\n"
           << "  energy estimate violations: " << r.at("energy_violations").get<std::size_t>() << "\n"
           << "  verdict: " << verdict_sentence(v) << "\n";
        by_dim[r.at("d").get<int>()].push_back(os.str());
      } else if (kind == "green") {
        os << "green mu=" << j.at("mu").get<double>() << " L=" << j.at("L").get<long>() << "\n"
           << "  residual " << j.at("residual_max").get<double>() << ", wrap estimate "
           << j.at("wrap_estimate").get<double>() << ", max |dG| " << j.at("grad_max").get<double>() << "\n";
        for (const auto& e : j.at("dyadic")) {
          os << "  p=" << e.at("p").get<double>() << ": annulus slope " << e.at("slope").get<double>()
             << " (expected " << e.at("expected_slope").get<double>() << " +/- 0.3): "
             << (e.at("within_tolerance").get<bool>() ? "pass" : "fail") << "\n";
        }
        by_dim[j.at("d").get<int>()].push_back(os.str());
      } else if (kind == "covariance") {
        os << "covariance " << j.at("generator").get<std::string>() << "\n  fitted decay exponent: ";
        if (j.at("alpha").is_string()) {
          os << "indeterminate\n";
        } else {
          const auto ci = j.at("alpha_ci");
          os << j.at("alpha").get<double>() << " [" << ci[0].get<double>() << ", " << ci[1].get<double>() << "]\n";
        }
        os << "  clamped spectral mass " << j.at("clamped_mass").get<double>()
           << (j.at("clamp_warning").get<bool>() ? " (warning: target covariance not realizable)" : "") << "\n";
        by_dim[j.at("d").get<int>()].push_back(os.str());
      } else if (kind == "energy") {
        os << "energy " << j.at("generator").get<std::string>() << " with " << j.at("potential").get<std::string>()
           << "\n";
        for (const auto& r : j.at("rows")) {
          os << "  N=" << r.at("N").get<double>() << ": density " << r.at("mean").get<double>() << " +/- "
             << r.at("spread").get<double>() << "\n";
        }
        os << "  spread decreasing: " << (j.at("spread_decreasing").get<bool>() ? "pass" : "fail") << "\n"
           << "  shift invariance: "
           << (!j.at("invariance_checked").get<bool>() ? "skipped"
                                                        : (j.at("invariance_holds").get<bool>() ? "pass" : "fail"))
           << "\n";
        by_dim[j.at("d").get<int>()].push_back(os.str());
      } else {
        throw IoError("artifact '" + path.string() + "' has unknown kind '" + kind + "'");
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError("corrupt artifact '" + path.string() + "': " + e.what());
    }
  }
  std::string out;
  for (const auto& [d, blocks] : by_dim) {
    out += "== d = " + std::to_string(d) + " ==\n";
    for (const auto& b : blocks) out += b;
  }
  return out;
}

ExitCode classify_exception(std::exception_ptr e, std::string& error_json) {
  json j;
  ExitCode code = ExitCode::numerical;
  std::string kind = "numerical";
  try {
    std::rethrow_exception(e);
  } catch (const BudgetError& ex) {
    code = ExitCode::budget;
    kind = "budget";
    j["field"] = ex.field();
    j["message"] = ex.what();
  } catch (const ConfigError& ex) {
    code = ExitCode::config;
    kind = "config";
    j["field"] = ex.field();
    j["message"] = ex.what();
  } catch (const IoError& ex) {
    code = ExitCode::io;
    kind = "io";
    j["message"] = ex.what();
  } catch (const GeneratorError& ex) {
    code = ExitCode::generator;
    kind = "generator";
    j["realization"] = ex.realization();
    j["message"] = ex.what();
  } catch (const std::invalid_argument& ex) {
    code = ExitCode::config;
    kind = "config";
    j["message"] = ex.what();
  } catch (const std::exception& ex) {
    j["message"] = ex.what();
  } catch (...) {
    j["message"] = "unknown error";
  }
  j["code"] = static_cast<int>(code);
  j["kind"] = kind;
  json doc;
  doc["error"] = j;
  error_json = doc.dump();
  return code;
}

}  // namespace incstat
