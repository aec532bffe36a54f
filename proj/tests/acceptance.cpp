// acceptance.cpp
//
// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. All Monte Carlo runs use master
// seed 1. The whole suite runs twice (1 and 2 worker threads); criterion 12
// compares the primary CSV outputs of the two passes byte for byte.

#include <Eigen/Dense>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "incstat/corrector.hpp"
#include "incstat/experiments.hpp"
#include "incstat/green.hpp"
#include "incstat/pointsets.hpp"
#include "incstat/randfields.hpp"
#include "incstat/rng.hpp"

using namespace incstat;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  Outcome(int i, std::string n) : id(i), name(std::move(n)) {}
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) { return fmt("%.17g", v); }

void write(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
  if (!os) throw std::runtime_error("cannot write " + p.string());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Dense (mu - lap)^{-1} delta_0 on the segment [-R, R], zero boundary values.
Eigen::VectorXd line_green(double mu, int R) {
  const int n = 2 * R + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0 + mu;
    if (i > 0) A(i, i - 1) = -1.0;
    if (i + 1 < n) A(i, i + 1) = -1.0;
  }
  return A.partialPivLu().solve(Eigen::VectorXd::Unit(n, R));
}

// Dense circulant solve on the ring of L sites; returns sum_x (G(x+1) - G(x))^2.
double ring_grad_green_sq(double mu, int L) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    A(i, i) = 2.0 + mu;
    A(i, (i + 1) % L) -= 1.0;
    A(i, (i + L - 1) % L) -= 1.0;
  }
  const Eigen::VectorXd G = A.llt().solve(Eigen::VectorXd::Unit(L, 0));
  double s = 0.0;
  for (int x = 0; x < L; ++x) s += (G[(x + 1) % L] - G[x]) * (G[(x + 1) % L] - G[x]);
  return s;
}

json load(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

RunResult run_config(const std::string& sub, const std::string& text, const fs::path& out, int threads) {
  return run(parse_config(sub, text), RunOptions{out, threads});
}

std::string scaling_text(int d, const std::string& generator, std::size_t n, const std::string& extra) {
  return "schema_version = 1\n"
         "d = " + std::to_string(d) + "\n"
         "generator = " + generator + "\n"
         "law = uniform_centered\n"
         "law_param = 1\n"
         "mu_max = 0.25\n"
         "mu_min = 0.000244140625\n"
         "mu_points = 11\n"
         "n = " + std::to_string(n) + "\n"
         "seed = " + std::to_string(kSeed) + "\n" + extra;
}

struct Suite {
  Suite(fs::path o, int t) : out(std::move(o)), threads(t) {}
  fs::path out;
  int threads = 1;
  std::size_t energy_violations = 0;
  std::size_t energy_realizations = 0;
  double worst_excess = -1e300;
  std::vector<fs::path> csvs;

  void absorb_scaling(const json& rep) {
    for (const auto& p : rep.at("points")) {
      energy_violations += p.at("energy_violations").get<std::size_t>();
      energy_realizations += p.at("n").get<std::size_t>();
      worst_excess = std::max(worst_excess, p.at("max_energy_excess").get<double>());
    }
  }

  Outcome c1() {
    Outcome o{1, "green oracle equivalence"};
    Timer t;
    double worst = 0.0;
    std::string csv = "mu,x,exact,dense\n";
    for (double mu : {1e-2, 1e-1, 1.0, 3.0}) {
      const auto dense = line_green(mu, 200);
      for (int x = -50; x <= 50; ++x) {
        const double g = green_1d_exact(mu, x);
        const double ref = dense[200 + x];
        worst = std::max(worst, std::abs(g - ref) / std::abs(ref));
        csv += num(mu) + "," + std::to_string(x) + "," + num(g) + "," + num(ref) + "\n";
      }
    }
    o.seconds = t.seconds();
    write(out / "c1_green_oracle.csv", csv);
    csvs.push_back(out / "c1_green_oracle.csv");
    o.pass = worst <= 1e-10 && o.seconds < 1.0;
    o.detail = "max relative error " + fmt("%.2e", worst) + " (tol 1e-10)";
    return o;
  }

  Outcome c2() {
    Outcome o{2, "variance identity, d=1 iid"};
    Timer t;
    const TorusGeometry g(1, 1024);
    GeneratorSpec spec;
    spec.kind = GeneratorKind::iid;
    spec.law = parse_law("uniform_centered", 1.0);
    const double var_a = 1.0 / 3.0;
    bool ok = true;
    std::string csv = "mu,mean,stderr,oracle,z\n";
    for (int k : {2, 4, 6}) {
      const double mu = std::ldexp(1.0, -k);
      const auto est = second_moment_mc(mu, spec, g, 500, kSeed, threads, static_cast<std::uint64_t>(k));
      const double oracle = var_a * ring_grad_green_sq(mu, 1024);
      const double z = (est.mean - oracle) / est.stderr_;
      ok = ok && std::abs(z) <= 3.0;
      energy_violations += est.energy_violations;
      energy_realizations += est.n;
      worst_excess = std::max(worst_excess, est.max_energy_excess);
      csv += num(mu) + "," + num(est.mean) + "," + num(est.stderr_) + "," + num(oracle) + "," + num(z) + "\n";
      o.detail += "mu=2^-" + std::to_string(k) + " z=" + fmt("%+.2f", z) + "  ";
    }
    o.seconds = t.seconds();
    write(out / "c2_variance_identity.csv", csv);
    csvs.push_back(out / "c2_variance_identity.csv");
    o.pass = ok && o.seconds < 60.0;
    o.detail += "(|z| <= 3)";
    return o;
  }

  Outcome scaling(int id, const std::string& name, int d, const std::string& extra, double limit,
                  const std::function<bool(const json&, std::string&)>& judge) {
    Outcome o{id, name};
    Timer t;
    const fs::path dir = out / ("c" + std::to_string(id));
    run_config("corrector-scaling", scaling_text(d, "iid", 200, extra), dir, threads);
    o.seconds = t.seconds();
    csvs.push_back(dir / "scaling.csv");
    const json rep = load(dir / "scaling_report.json").at("report");
    absorb_scaling(rep);
    o.pass = judge(rep, o.detail) && o.seconds < limit;
    return o;
  }

  Outcome c3() {
    return scaling(3, "d=1 power-law divergence", 1, "", 300.0, [](const json& r, std::string& s) {
      const double slope = r["fit"]["loglog_slope"], r2 = r["fit"]["loglog_r2"];
      s = "log-log slope " + fmt("%.4f", slope) + " in [-0.6, -0.4], R^2 " + fmt("%.4f", r2) + " >= 0.9, verdict " +
          r["verdict"].get<std::string>();
      return slope >= -0.6 && slope <= -0.4 && r2 >= 0.9;
    });
  }

  Outcome c4() {
    return scaling(4, "d=2 logarithmic divergence", 2, "l_cap = 1024\n", 900.0, [](const json& r, std::string& s) {
      const double slope = r["fit"]["loglog_slope"], r2 = r["fit"]["loglinear_r2"];
      s = "|ln mu| fit R^2 " + fmt("%.4f", r2) + " >= 0.95, log-log slope " + fmt("%.4f", slope) +
          " > -0.15, verdict " + r["verdict"].get<std::string>();
      return r2 >= 0.95 && slope > -0.15;
    });
  }

  Outcome c5() {
    return scaling(5, "d=3 boundedness", 3, "l_cap = 96\n", 1200.0, [](const json& r, std::string& s) {
      const double ratio = r["fit"]["boundedness_ratio"];
      const std::string v = r["verdict"];
      s = "boundedness ratio " + fmt("%.4f", ratio) + " <= 1.5, verdict " + v;
      return ratio <= 1.5 && v == "bounded";
    });
  }

  Outcome c6() {
    Outcome o{6, "a-priori energy estimate"};
    o.pass = energy_violations == 0 && energy_realizations > 0;
    o.detail = std::to_string(energy_violations) + " violations in " + std::to_string(energy_realizations) +
               " realizations, max of mu<phi^2> + <|dphi|^2> - <|zeta|^2> = " + fmt("%.2e", worst_excess);
    return o;
  }

  Outcome c7() {
    Outcome o{7, "gradient-type source stays bounded"};
    Timer t;
    bool ok = true;
    for (int d = 1; d <= 3; ++d) {
      const fs::path dir = out / ("c7_d" + std::to_string(d));
      const std::string extra = d == 3 ? "l_cap = 32\n" : "";
      run_config("corrector-scaling", scaling_text(d, "gradient", d == 3 ? 40 : 100, extra), dir, threads);
      csvs.push_back(dir / "scaling.csv");
      const json rep = load(dir / "scaling_report.json").at("report");
      std::size_t viol = 0;
      double worst_gap = -1e300;
      for (const auto& p : rep.at("points")) {
        viol += p.at("psi_bound_violations").get<std::size_t>();
        worst_gap = std::max(worst_gap, p.at("mean").get<double>() - p.at("psi_second_moment").get<double>());
      }
      const std::string v = rep.at("verdict");
      const bool verdict_ok = d == 1 || v == "bounded";
      ok = ok && viol == 0 && worst_gap <= 0.0 && verdict_ok;
      o.detail += "d=" + std::to_string(d) + ": max(E[phi^2]-E[psi^2]) " + fmt("%.3f", worst_gap) + ", verdict " + v +
                  (d == 1 ? " (not required)" : "") + "; ";
    }
    o.seconds = t.seconds();
    o.pass = ok;
    return o;
  }

  Outcome c8() {
    Outcome o{8, "dyadic green bound, d=3"};
    Timer t;
    const fs::path dir = out / "c8";
    run_config("green", "schema_version = 1\nd = 3\nL = 128\nmu = 1e-4\np = 1,2\n", dir, threads);
    o.seconds = t.seconds();
    csvs.push_back(dir / "green_annuli.csv");
    const json summary = load(dir / "green_summary.json");
    bool ok = summary.at("dyadic").size() == 2;
    for (const auto& e : summary.at("dyadic")) {
      const double slope = e["slope"], expect = e["expected_slope"];
      ok = ok && std::abs(slope - expect) <= 0.3;
      o.detail += "p=" + fmt("%g", e["p"].get<double>()) + " slope " + fmt("%.3f", slope) + " vs " +
                  fmt("%g", expect) + "; ";
    }
    o.detail += "(tol 0.3)";
    o.pass = ok && o.seconds < 60.0;
    return o;
  }

  Outcome c9() {
    Outcome o{9, "green representation agreement"};
    Timer t;
    double worst = 0.0;
    std::string csv = "case,d,L,mu,seed,relative_deviation\n";
    for (std::uint64_t c = 0; c < 10; ++c) {
      const std::uint64_t key = derive_seed(kSeed, {9, c});
      const int d = 1 + static_cast<int>(c % 3);
      const double mu = std::pow(10.0, -3.0 + 3.0 * hash_uniform(key, 0));
      const std::int64_t L = d == 1 ? 256 : (d == 2 ? 24 : 10);
      const std::uint64_t seed = derive_seed(key, {1});
      const auto z = iid_increments(TorusGeometry(d, L), static_cast<int>(c % d), parse_law("gaussian", 1.0), seed);
      const double rel = green_representation_check(mu, z).relative();
      worst = std::max(worst, rel);
      csv += std::to_string(c) + "," + std::to_string(d) + "," + std::to_string(L) + "," + num(mu) + "," +
             std::to_string(seed) + "," + num(rel) + "\n";
    }
    o.seconds = t.seconds();
    write(out / "c9_green_representation.csv", csv);
    csvs.push_back(out / "c9_green_representation.csv");
    o.pass = worst <= 1e-8;
    o.detail = "max relative deviation " + fmt("%.2e", worst) + " over 10 cases (tol 1e-8)";
    return o;
  }

  Outcome c10() {
    Outcome o{10, "thermodynamic density self-averaging"};
    Timer t;
    const fs::path dir = out / "c10";
    run_config("energy",
               "schema_version = 1\nd = 1\ngenerator = renewal\ntau = uniform\ntau_a = 0.5\ntau_b = 1.5\n"
               "potential = indicator\ncutoff = 2\nbox_sizes = 256,512,1024,2048,4096\nseeds = 32\nshift = 1000\n",
               dir, threads);
    o.seconds = t.seconds();
    csvs.push_back(dir / "energy.csv");
    const json j = load(dir / "energy_summary.json");
    const bool dec = j["spread_decreasing"], inv = j["invariance_holds"];
    for (const auto& r : j["rows"]) o.detail += fmt("%g", r["N"].get<double>()) + ":" + fmt("%.4f", r["spread"]) + " ";
    o.detail = "spreads " + o.detail + (dec ? "strictly decreasing" : "NOT strictly decreasing") +
               (inv ? ", shifted densities within 2x spread" : ", shifted densities disagree");
    o.pass = dec && inv;
    return o;
  }

  Outcome c11() {
    Outcome o{11, "linearity detector"};
    Timer t;
    int correct = 0;
    std::string csv = "case,kind,d,amplitude,affine,max_dependence,A_exact\n";
    for (std::uint64_t c = 0; c < 50; ++c) {
      const std::uint64_t key = derive_seed(kSeed, {11, c});
      const int d = 1 + static_cast<int>(c % 3);
      ImageGenerator gen;
      double amp = 0.0;
      if (c % 2 == 0) {
        gen.kind = ImageKind::affine;
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            gen.A[i][j] = std::ldexp(std::floor(hash_uniform(key, static_cast<std::uint64_t>(3 * i + j)) * 256.0) - 128.0, -5);
          }
          gen.A[i][i] += 8.0;
        }
      } else {
        gen.kind = ImageKind::perturbed_identity;
        amp = 0.1 + 0.39 * hash_uniform(key, 99);
        gen.amplitude = amp;
      }
      const auto img = lattice_image_pointset(gen, d, Site{}, d == 3 ? 6 : 10, derive_seed(key, {2}));
      const auto r = linearity_detector(img.field, 1e-9);
      bool exact = true;
      if (gen.kind == ImageKind::affine) {
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) exact = exact && r.A[i][j] == gen.A[i][j];
        }
      }
      const bool ok = gen.kind == ImageKind::affine ? (r.affine && exact) : !r.affine;
      correct += ok ? 1 : 0;
      csv += std::to_string(c) + "," + (gen.kind == ImageKind::affine ? "affine" : "perturbed") + "," +
             std::to_string(d) + "," + num(amp) + "," + (r.affine ? "1" : "0") + "," + num(r.max_dependence) + "," +
             (exact ? "1" : "0") + "\n";
    }
    o.seconds = t.seconds();
    write(out / "c11_detector.csv", csv);
    csvs.push_back(out / "c11_detector.csv");
    o.pass = correct == 50;
    o.detail = std::to_string(correct) + "/50 classified correctly (25 affine with exact A, 25 perturbed)";
    return o;
  }

  std::vector<Outcome> all() {
    fs::remove_all(out);
    fs::create_directories(out);
    std::vector<Outcome> r;
    for (auto fn : {&Suite::c1, &Suite::c2, &Suite::c3, &Suite::c4, &Suite::c5}) {
      r.push_back((this->*fn)());
      std::cerr << "  [threads=" << threads << "] criterion " << r.back().id << " done in "
                << fmt("%.1f", r.back().seconds) << " s\n";
    }
    r.push_back(c6());
    for (auto fn : {&Suite::c7, &Suite::c8, &Suite::c9, &Suite::c10, &Suite::c11}) {
      r.push_back((this->*fn)());
      std::cerr << "  [threads=" << threads << "] criterion " << r.back().id << " done in "
                << fmt("%.1f", r.back().seconds) << " s\n";
    }
    return r;
  }
};

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "incstat_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--out") out = argv[i + 1];
  }

  Suite one{out / "threads1", 1};
  auto results = one.all();
  Suite two{out / "threads2", 2};
  two.all();

  Outcome c12{12, "determinism across thread counts"};
  std::size_t same = 0;
  for (const auto& p : one.csvs) {
    const fs::path q = two.out / fs::relative(p, one.out);
    if (fs::exists(q) && slurp(p) == slurp(q)) {
      ++same;
    } else {
      c12.detail += "differs: " + fs::relative(p, one.out).string() + "; ";
    }
  }
  c12.pass = same == one.csvs.size() && !one.csvs.empty();
  c12.detail += std::to_string(same) + "/" + std::to_string(one.csvs.size()) +
                " primary CSVs byte-identical (1 vs 2 threads)";
  results.push_back(c12);

  int failed = 0;
  std::ostringstream summary;
  for (const auto& r : results) {
    summary << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.name << "): " << r.detail;
    if (r.seconds > 0.0) summary << " [" << fmt("%.1f", r.seconds) << " s]";
    summary << "\n";
    failed += r.pass ? 0 : 1;
  }
  summary << (failed == 0 ? "all 12 criteria passed" : std::to_string(failed) + " of 12 criteria failed") << "\n";
  std::cout << summary.str();
  write(out / "acceptance_summary.txt", summary.str());
  return failed == 0 ? 0 : 1;
}
