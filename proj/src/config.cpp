#include "floq/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "floq/branch.hpp"
#include "floq/green.hpp"
#include "floq/heat_sim.hpp"
#include "floq/inequalities.hpp"
#include "floq/modulation.hpp"
#include "floq/profile.hpp"
#include "floq/resolvent.hpp"

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace floq {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config: empty key at line " +
                               std::to_string(lineno));
    }
    cfg.kv_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

std::string ExperimentConfig::str(const std::string& key,
                                  const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::num(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw std::runtime_error("config: " + key + " is not a number");
  }
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw std::runtime_error("config: " + key + " is not an integer");
  }
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: " + key + " " + why);
  };
  static const std::vector<std::string> kinds = {
      "oracle-suite", "stability-report", "evans-scan",   "resolvent-kernel",
      "images-check", "hf-scan",          "green-synth",  "green-split",
      "heat-q",       "inequalities",     "modulation"};
  std::string kind = str("experiment.kind");
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    fail("experiment.kind", "must be one of the documented experiment kinds");
  }
  if (str("experiment.output").empty()) fail("experiment.output", "is required");
  if (has("params.K") && integer("params.K", 0) < 8) {
    fail("params.K", "must be >= 8");
  }
  if (has("params.grid")) {
    int g = integer("params.grid", 0);
    if (g < 16 || g % 2 != 0) fail("params.grid", "must be even and >= 16");
  }
  if (has("params.n_xi") && integer("params.n_xi", 0) < 16) {
    fail("params.n_xi", "must be >= 16");
  }
  if (has("params.tol")) {
    double tol = num("params.tol", 0);
    if (tol < 1e-13 || tol > 1e-4) fail("params.tol", "must be in [1e-13, 1e-4]");
  }
  if (has("params.E0")) {
    double e = num("params.E0", 0);
    if (!(e > 0.0 && e <= 0.05)) fail("params.E0", "must be in (0, 0.05]");
  }
  if (has("params.q") && integer("params.q", 0) < 4) {
    fail("params.q", "must be >= 4");
  }
  if (has("params.r") && !(num("params.r", 0) > 2.0)) {
    fail("params.r", "must be > 2");
  }
  if (has("params.T") && !(num("params.T", 0) > 0.0)) {
    fail("params.T", "must be positive");
  }
  if (has("params.xi")) {
    double xi = num("params.xi", 0);
    if (std::abs(xi) > M_PI) fail("params.xi", "must satisfy |xi| <= pi");
  }
  if (has("params.J") && integer("params.J", 0) < 1) {
    fail("params.J", "must be >= 1");
  }
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("sha256: cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[65536];
  while (f) {
    f.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, f.gcount());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace {

WaveProfile fixture_profile(const ExperimentConfig& cfg) {
  std::string name = cfg.str("experiment.fixture", "advection-diffusion");
  int grid = cfg.integer("params.grid", 64);
  if (name == "heat") return heat_profile(grid);
  if (name == "advection-diffusion") {
    return advection_diffusion_profile(cfg.num("params.wave_speed", 1.0), grid);
  }
  if (name == "manufactured") {
    return manufactured_profile(cfg.num("params.amplitude", 0.3),
                                cfg.num("params.a", 1.0), grid);
  }
  if (!name.empty() && fs::exists(name)) return WaveProfile::load(name);
  throw std::invalid_argument("config: experiment.fixture unknown: " + name);
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / n;
  return g;
}

void write_text(const std::string& path, const std::string& text,
                std::vector<std::string>& artifacts) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("run: cannot write " + path);
  f << text;
  artifacts.push_back(path);
}

void write_json(const std::string& path, const json& j,
                std::vector<std::string>& artifacts) {
  write_text(path, j.dump(2) + "\n", artifacts);
}

json slope_json(const SlopeFit& f) {
  return json{{"value", f.slope},
              {"ci", f.slope_halfwidth},
              {"intercept", f.intercept},
              {"scatter", f.scatter}};
}

void run_kind(const ExperimentConfig& cfg, const std::string& out,
              std::vector<std::string>& artifacts) {
  const std::string kind = cfg.str("experiment.kind");
  const double tol = cfg.num("params.tol", 1e-10);
  SolveOptions sopts;
  sopts.tol = tol;

  if (kind == "evans-scan") {
    WaveProfile prof = fixture_profile(cfg);
    double xi_lo = cfg.num("params.xi_min", -M_PI), xi_hi = cfg.num("params.xi_max", M_PI);
    int n_xi = cfg.integer("params.n_xi", 16);
    double re_lo = cfg.num("params.re_min", -1.0), re_hi = cfg.num("params.re_max", 1.0);
    double im = cfg.num("params.im", 0.0);
    int n_l = cfg.integer("params.n_lambda", 16);
    std::ostringstream csv;
    csv << "xi,re_lambda,im_lambda,re_D,im_D\n";
    for (int i = 0; i < n_xi; ++i) {
      double xi = xi_lo + (xi_hi - xi_lo) * i / std::max(1, n_xi - 1);
      for (int j = 0; j < n_l; ++j) {
        double re = re_lo + (re_hi - re_lo) * j / std::max(1, n_l - 1);
        Complex D = evans(prof, Complex(re, im), xi, tol);
        csv << format_g17(xi) << "," << format_g17(re) << "," << format_g17(im)
            << "," << format_g17(D.real()) << "," << format_g17(D.imag())
            << "\n";
      }
    }
    write_text(out + "/evans_scan.csv", csv.str(), artifacts);
    return;
  }

  if (kind == "stability-report") {
    WaveProfile prof = fixture_profile(cfg);
    int K = cfg.integer("params.K", 16);
    StabilityReport rep = check_diffusive_stability(
        prof, K, cfg.integer("params.xi_samples", 64));
    json j{{"D1", rep.d1},
           {"zero_eig_abs", rep.zero_eig_abs},
           {"gap", rep.gap},
           {"D2", rep.d2},
           {"theta", rep.theta},
           {"xi_cut", rep.xi_cut},
           {"worst_xi", rep.worst_xi},
           {"max_re_tail", rep.max_re_tail}};
    if (rep.d1) {
      SpectralBranch br = critical_branch(prof, K, 0.1 * M_PI, 21);
      j["lambda1"] = {br.lambda1.real(), br.lambda1.imag()};
      j["lambda2"] = {br.lambda2.real(), br.lambda2.imag()};
      j["b"] = br.diffusion;
      j["drift"] = br.drift;
      j["surrogate_zero_mode"] = br.surrogate_zero_mode;
    }
    write_json(out + "/stability_report.json", j, artifacts);
    return;
  }

  if (kind == "resolvent-kernel") {
    WaveProfile prof = fixture_profile(cfg);
    Complex lambda(cfg.num("params.re_lambda", 1.0),
                   cfg.num("params.im_lambda", 0.0));
    double xi = cfg.num("params.xi", 0.0);
    FloquetSystem sys(prof, xi, lambda);
    int nx = cfg.integer("params.kernel_grid", 64);
    std::vector<double> g = uniform_grid(nx);
    bool whole = cfg.str("params.kind", "periodic") == "whole";
    KernelField f = whole ? whole_line_kernel(sys, g, g, sopts)
                          : periodic_kernel(sys, g, g, sopts);
    std::ostringstream csv;
    csv << "x,y,re_G,im_G,re_Gp,im_Gp\n";
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < nx; ++j) {
        Complex G = f.G(i, j)(0, 0), Gp = f.Gp(i, j)(0, 0);
        csv << format_g17(g[i]) << "," << format_g17(g[j]) << ","
            << format_g17(G.real()) << "," << format_g17(G.imag()) << ","
            << format_g17(Gp.real()) << "," << format_g17(Gp.imag()) << "\n";
      }
    }
    write_text(out + "/resolvent_kernel.csv", csv.str(), artifacts);
    return;
  }

  if (kind == "images-check") {
    WaveProfile prof = fixture_profile(cfg);
    Complex lambda(cfg.num("params.re_lambda", 1.0),
                   cfg.num("params.im_lambda", 0.0));
    FloquetSystem sys(prof, cfg.num("params.xi", 0.3), lambda);
    int J = cfg.integer("params.J", 10);
    std::vector<double> g = uniform_grid(cfg.integer("params.kernel_grid", 16));
    ImagesCheck chk = method_of_images_check(sys, J, g, g, sopts);
    json j{{"J", J},
           {"max_deviation", chk.max_deviation},
           {"decay_rate", chk.decay_rate},
           {"tail_bound", chk.tail_bound},
           {"deviation_by_j", chk.deviation_by_j}};
    write_json(out + "/images_check.json", j, artifacts);
    return;
  }

  if (kind == "hf-scan") {
    WaveProfile prof = fixture_profile(cfg);
    double xi = cfg.num("params.xi", 0.0);
    double lo = cfg.num("params.lambda_min", 10.0);
    double hi = cfg.num("params.lambda_max", 1e4);
    int n = cfg.integer("params.n_lambda", 13);
    double arg = cfg.num("params.ray_angle", 0.0);
    std::vector<Complex> ls;
    for (int i = 0; i < n; ++i) {
      double r = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
      ls.push_back(std::polar(r, arg));
    }
    HighFrequencyFit fit = high_frequency_modulus_check(prof, xi, ls);
    json j{{"C", fit.C},
           {"rate", fit.rate},
           {"scatter", fit.scatter},
           {"sup_scaled", fit.sup_scaled}};
    write_json(out + "/hf_scan.json", j, artifacts);
    return;
  }

  if (kind == "green-synth" || kind == "green-split") {
    WaveProfile prof = fixture_profile(cfg);
    int K = cfg.integer("params.K", 16);
    BlochSynthOptions bopts;
    bopts.K = K;
    bopts.n_xi = cfg.integer("params.n_xi", 256);
    double t = cfg.num("params.T", 1.0);
    SpectralBranch br = critical_branch(prof, K, 0.1 * M_PI, 21);
    LeadingKernel lead(br);
    double W = std::abs(lead.drift()) * t +
               8.0 * std::sqrt(lead.diffusion() * t) + 2.0;
    int nx = cfg.integer("params.n_x", 200);
    std::vector<double> xs(nx), ys = {0.0, 0.25, 0.5};
    for (int i = 0; i < nx; ++i) xs[i] = -W + 2.0 * W * i / (nx - 1);
    std::string route = cfg.str("params.route", "bloch");
    GreenField f = (route == "direct")
                       ? green_direct(prof, t, xs, ys)
                       : green_bloch(prof, t, xs, ys, bopts);
    std::ostringstream csv;
    csv << "x,y,re_G,im_G\n";
    for (int i = 0; i < nx; ++i) {
      for (size_t j = 0; j < ys.size(); ++j) {
        csv << format_g17(xs[i]) << "," << format_g17(ys[j]) << ","
            << format_g17(f.value(i, j)(0, 0).real()) << ","
            << format_g17(f.value(i, j)(0, 0).imag()) << "\n";
      }
    }
    write_text(out + "/green_field.csv", csv.str(), artifacts);
    if (kind == "green-split") {
      std::vector<GreenField> fields;
      for (double tt : {2.0, 4.0, 8.0, 16.0, 32.0, 50.0}) {
        double Wt = std::abs(lead.drift()) * tt +
                    8.0 * std::sqrt(lead.diffusion() * tt) + 2.0;
        std::vector<double> xts(nx);
        for (int i = 0; i < nx; ++i) xts[i] = -Wt + 2.0 * Wt * i / (nx - 1);
        fields.push_back(green_bloch(prof, tt, xts, ys, bopts));
      }
      LeadingTermSplit split = leading_split(fields, br);
      json j{{"a", lead.drift()},
             {"b", lead.diffusion()},
             {"C_res", split.C_res},
             {"M_res", split.M_res},
             {"slope", slope_json(split.sup_slope)},
             {"scatter", split.scatter},
             {"shape_violation", split.shape_violation}};
      write_json(out + "/green_split.json", j, artifacts);
    }
    return;
  }

  if (kind == "heat-q") {
    InitialData data;
    int cls = cfg.integer("params.class", 1);
    data.cls = static_cast<DataClass>(cls);
    data.E0 = cfg.num("params.E0", 0.01);
    data.M = cfg.num("params.M", 4.0);
    data.r = cfg.num("params.r", 3.0);
    HeatSimOptions hopts;
    hopts.dt = cfg.num("params.dt", 0.02);
    DecayReport rep = decay_report_heat(data, cfg.integer("params.q", 4),
                                        cfg.num("params.T", 500.0), {1, 2, 0},
                                        hopts);
    json j{{"q", rep.q},
           {"E0", rep.E0},
           {"U_star", rep.U_star},
           {"U_star_tail", rep.U_star_tail},
           {"U0", rep.U0},
           {"U_slope", slope_json(rep.U_slope)}};
    json slopes;
    for (auto& [p, s] : rep.norm_slopes) {
      slopes[p == 0 ? "inf" : std::to_string(p)] = slope_json(s);
    }
    j["norm_slopes"] = slopes;
    json dev;
    for (auto& [p, s] : rep.dev_slopes) {
      dev[p == 0 ? "inf" : std::to_string(p)] = slope_json(s);
    }
    j["deviation_slopes"] = dev;
    std::ostringstream csv;
    csv << "t";
    for (auto& [p, v] : rep.norms) csv << ",L" << (p == 0 ? "inf" : std::to_string(p));
    for (auto& [p, v] : rep.deviations) csv << ",dev_L" << (p == 0 ? "inf" : std::to_string(p));
    csv << "\n";
    for (size_t i = 0; i < rep.times.size(); ++i) {
      csv << format_g17(rep.times[i]);
      for (auto& [p, v] : rep.norms) csv << "," << format_g17(v[i]);
      for (auto& [p, v] : rep.deviations) csv << "," << format_g17(v[i]);
      csv << "\n";
    }
    write_text(out + "/heat_q_timeseries.csv", csv.str(), artifacts);
    write_json(out + "/heat_q_report.json", j, artifacts);
    return;
  }

  if (kind == "inequalities") {
    InequalityReport rep = inequality_suite(
        static_cast<std::uint64_t>(cfg.integer("experiment.seed", 12345)),
        cfg.integer("params.samples", 220));
    json lemmas = json::array();
    for (const LemmaCheck& c : rep.lemmas) {
      lemmas.push_back({{"name", c.name},
                        {"samples", c.samples},
                        {"constant", c.fitted_constant},
                        {"cap", c.cap},
                        {"violations", c.violations},
                        {"pass", c.pass}});
    }
    write_json(out + "/inequalities.json",
               json{{"all_pass", rep.all_pass}, {"lemmas", lemmas}}, artifacts);
    return;
  }

  if (kind == "modulation") {
    WaveProfile prof = fixture_profile(cfg);
    int K = cfg.integer("params.K", 16);
    SpectralBranch br = critical_branch(prof, K, 0.1 * M_PI, 21);
    InitialData v0;
    v0.cls = DataClass::GaussianEnvelope;
    v0.E0 = cfg.num("params.E0", 0.005);
    v0.M = cfg.num("params.M", 2.0);
    ModulationOptions mopts;
    mopts.T_final = cfg.num("params.T", 20.0);
    mopts.K = K;
    ModulationResult r = modulation_pipeline(prof, br, v0, mopts);
    json j{{"iterations", r.iterations},
           {"converged", r.converged},
           {"diverging", r.diverging},
           {"iteration_changes", r.iteration_changes},
           {"q_smallness_c", r.q_smallness_c},
           {"split_identity_error", r.split_identity_error},
           {"linear_identity_error", r.linear_identity_error},
           {"Ubar0", r.Ubar0},
           {"Ubar_star", r.Ubar_star},
           {"dev_sup", r.dev_sup},
           {"times", r.times}};
    write_json(out + "/modulation.json", j, artifacts);
    return;
  }

  if (kind == "oracle-suite") {
    // Constant-coefficient oracle comparisons; summary with pass flags.
    WaveProfile prof = advection_diffusion_profile(1.0, 64);
    std::vector<double> g = uniform_grid(16);
    double worst_whole = 0.0, worst_per = 0.0;
    for (auto [re, xi] : std::vector<std::pair<double, double>>{
             {1.0, 0.3}, {5.0, -1.2}, {20.0, 2.0}}) {
      Complex lambda(re, 0.0);
      FloquetSystem sys(prof, xi, lambda);
      Complex mu_p = 0.5 * (-(prof.speed() + Complex(0, 2 * xi)) +
                            std::sqrt(Complex(prof.speed() * prof.speed(), 0) +
                                      4.0 * lambda));
      Complex mu_m = 0.5 * (-(prof.speed() + Complex(0, 2 * xi)) -
                            std::sqrt(Complex(prof.speed() * prof.speed(), 0) +
                                      4.0 * lambda));
      KernelField w = whole_line_kernel(sys, g, g, sopts);
      KernelField p = periodic_kernel(sys, g, g, sopts);
      for (size_t i = 0; i < g.size(); ++i) {
        for (size_t j = 0; j < g.size(); ++j) {
          double d = g[i] - g[j];
          Complex gw = (d > 0 ? std::exp(mu_m * d) : std::exp(mu_p * d)) /
                       (mu_m - mu_p);
          worst_whole = std::max(worst_whole,
                                 std::abs(w.G(i, j)(0, 0) - gw) / std::abs(gw));
          Complex shift = d > 0 ? Complex(0.0, 0.0) : Complex(1.0, 0.0);
          Complex gp =
              std::exp(mu_m * (d + shift)) /
                  ((mu_m - mu_p) * (1.0 - std::exp(mu_m))) -
              std::exp(mu_p * (d + shift)) /
                  ((mu_m - mu_p) * (1.0 - std::exp(mu_p)));
          worst_per = std::max(worst_per,
                               std::abs(p.G(i, j)(0, 0) - gp) / std::abs(gp));
        }
      }
    }
    json j{{"whole_line_max_rel_error", worst_whole},
           {"periodic_max_rel_error", worst_per},
           {"pass", worst_whole < 1e-8 && worst_per < 1e-8}};
    write_json(out + "/oracle_suite.json", j, artifacts);
    return;
  }

  throw std::invalid_argument("run: unknown experiment kind " + kind);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string out = cfg.str("experiment.output");
  fs::create_directories(out);
  RunResult res;
  try {
    run_kind(cfg, out, res.artifacts);
  } catch (const std::exception& e) {
    for (const std::string& a : res.artifacts) {
      std::error_code ec;
      fs::remove(a, ec);
    }
    throw std::runtime_error(std::string("run: experiment '") +
                             cfg.str("experiment.kind") + "' failed: " +
                             e.what());
  }
  // manifest: every artifact in the output directory with content hashes
  json manifest;
  manifest["files"] = json::array();
  for (const auto& entry : fs::directory_iterator(out)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "manifest.json") continue;
    manifest["files"].push_back(
        {{"name", entry.path().filename().string()},
         {"sha256", sha256_file(entry.path().string())},
         {"bytes", static_cast<std::uint64_t>(entry.file_size())}});
  }
  std::sort(manifest["files"].begin(), manifest["files"].end(),
            [](const json& a, const json& b) {
              return a["name"].get<std::string>() < b["name"].get<std::string>();
            });
  std::string mpath = out + "/manifest.json";
  std::ofstream mf(mpath);
  mf << manifest.dump(2) << "\n";
  res.artifacts.push_back(mpath);
  return res;
}

}  // namespace floq
