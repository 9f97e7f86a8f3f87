// Command-line driver: profile construction/validation, Evans evaluation and
// scans, Bloch spectra and stability reports, resolvent kernels, Green
// function synthesis/splits, the nonlinear simulators, and config-driven
// experiment runs with artifact manifests.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "floq/branch.hpp"
#include "floq/config.hpp"
#include "floq/green.hpp"
#include "floq/heat_sim.hpp"
#include "floq/inequalities.hpp"
#include "floq/modulation.hpp"
#include "floq/profile.hpp"
#include "floq/resolvent.hpp"

using namespace floq;
using nlohmann::json;

namespace {

std::pair<double, double> parse_complex(const std::string& s) {
  double re = 0.0, im = 0.0;
  if (std::sscanf(s.c_str(), "%lf,%lf", &re, &im) < 1) {
    throw CLI::ValidationError("expected re[,im]");
  }
  return {re, im};
}

WaveProfile profile_by_name(const std::string& name, int grid) {
  if (name == "heat") return heat_profile(grid);
  if (name == "advection-diffusion") return advection_diffusion_profile(1.0, grid);
  if (name == "manufactured") return manufactured_profile(0.3, 1.0, grid);
  return WaveProfile::load(name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch/Floquet machinery for periodic-coefficient parabolic "
               "operators: Evans functions, resolvent kernels, Green function "
               "synthesis, and decay-rate simulation"};
  app.require_subcommand(1);

  // ---- profile ----
  auto* profile_cmd = app.add_subcommand("profile", "construct and validate profiles");
  profile_cmd->require_subcommand(1);
  {
    auto* mk = profile_cmd->add_subcommand("make-constant", "constant coefficients");
    static int n = 1, grid = 64;
    static double a = 0.0, c0 = 0.0;
    static std::string out = "profile.txt";
    mk->add_option("--n", n);
    mk->add_option("--a", a);
    mk->add_option("--c0", c0, "diagonal coefficient value");
    mk->add_option("--grid", grid);
    mk->add_option("--out", out);
    mk->callback([] {
      Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n) * c0;
      WaveProfile::constant(n, a, c, grid).save(out);
      std::cout << "wrote " << out << "\n";
    });

    auto* mm = profile_cmd->add_subcommand("make-manufactured",
                                           "profile with an exact zero mode");
    static double amp = 0.3, am = 1.0;
    static int gridm = 64;
    static std::string outm = "profile.txt";
    mm->add_option("--amplitude", amp);
    mm->add_option("--a", am);
    mm->add_option("--grid", gridm);
    mm->add_option("--out", outm);
    mm->callback([] {
      manufactured_profile(amp, am, gridm).save(outm);
      std::cout << "wrote " << outm << "\n";
    });

    auto* val = profile_cmd->add_subcommand("validate", "load and re-validate");
    static std::string path;
    val->add_option("file", path)->required();
    val->callback([] {
      WaveProfile p = WaveProfile::load(path);
      std::cout << "ok: n=" << p.dimension() << " a=" << p.speed()
                << " Nx=" << p.grid_size() << "\n";
    });
  }

  // ---- evans ----
  auto* evans_cmd = app.add_subcommand("evans", "periodic Evans function");
  evans_cmd->require_subcommand(1);
  {
    auto* ev = evans_cmd->add_subcommand("eval", "single evaluation");
    static std::string lam = "1,0", fixture = "advection-diffusion";
    static double xi = 0.0;
    ev->add_option("--lambda", lam, "re,im");
    ev->add_option("--xi", xi);
    ev->add_option("--profile", fixture, "fixture name or file");
    ev->callback([] {
      auto [re, im] = parse_complex(lam);
      Complex D = evans(profile_by_name(fixture, 64), Complex(re, im), xi);
      std::cout << format_g17(D.real()) << " " << format_g17(D.imag()) << "\n";
    });

    auto* sc = evans_cmd->add_subcommand("scan", "CSV scan over (xi, lambda)");
    static std::string fixture2 = "advection-diffusion", out2 = "evans_scan.csv";
    static int nxi = 16, nl = 16;
    static double re_min = -1.0, re_max = 1.0, im2 = 0.0;
    sc->add_option("--profile", fixture2);
    sc->add_option("--n-xi", nxi);
    sc->add_option("--n-lambda", nl);
    sc->add_option("--re-min", re_min);
    sc->add_option("--re-max", re_max);
    sc->add_option("--im", im2);
    sc->add_option("--out", out2);
    sc->callback([] {
      WaveProfile prof = profile_by_name(fixture2, 64);
      std::ofstream f(out2);
      f << "xi,re_lambda,im_lambda,re_D,im_D\n";
      for (int i = 0; i < nxi; ++i) {
        double xi = -M_PI + 2.0 * M_PI * i / nxi;
        for (int j = 0; j < nl; ++j) {
          double re = re_min + (re_max - re_min) * j / std::max(1, nl - 1);
          Complex D = evans(prof, Complex(re, im2), xi);
          f << format_g17(xi) << "," << format_g17(re) << "," << format_g17(im2)
            << "," << format_g17(D.real()) << "," << format_g17(D.imag())
            << "\n";
        }
      }
      std::cout << "wrote " << out2 << "\n";
    });
  }

  // ---- spectrum ----
  auto* spec_cmd = app.add_subcommand("spectrum", "Bloch spectra and stability");
  spec_cmd->require_subcommand(1);
  {
    auto* sc = spec_cmd->add_subcommand("scan", "top eigenvalues over xi");
    static std::string fixture = "advection-diffusion", out = "spectrum_scan.csv";
    static int K = 16, nxi = 64, top = 5;
    sc->add_option("--profile", fixture);
    sc->add_option("--K", K);
    sc->add_option("--n-xi", nxi);
    sc->add_option("--top", top);
    sc->add_option("--out", out);
    sc->callback([] {
      WaveProfile prof = profile_by_name(fixture, 64);
      std::ofstream f(out);
      f << "xi,index,re_lambda,im_lambda\n";
      for (int i = 0; i < nxi; ++i) {
        double xi = -M_PI + 2.0 * M_PI * i / nxi;
        BlochEigs eg = bloch_spectrum(prof, xi, K);
        for (int k = 0; k < std::min<int>(top, eg.values.size()); ++k) {
          f << format_g17(xi) << "," << k << ","
            << format_g17(eg.values[k].real()) << ","
            << format_g17(eg.values[k].imag()) << "\n";
        }
      }
      std::cout << "wrote " << out << "\n";
    });

    auto* br = spec_cmd->add_subcommand("branch", "critical branch lambda(xi)");
    static std::string fixture2 = "advection-diffusion", out2 = "branch.csv";
    static int K2 = 16, nxi2 = 33;
    static double ximax = 0.1 * M_PI;
    br->add_option("--profile", fixture2);
    br->add_option("--K", K2);
    br->add_option("--n-xi", nxi2);
    br->add_option("--xi-max", ximax);
    br->add_option("--out", out2);
    br->callback([] {
      WaveProfile prof = profile_by_name(fixture2, 64);
      SpectralBranch b = critical_branch(prof, K2, ximax, nxi2);
      std::ofstream f(out2);
      f << "xi,re_lambda,im_lambda\n";
      for (size_t i = 0; i < b.xi_grid.size(); ++i) {
        f << format_g17(b.xi_grid[i]) << ","
          << format_g17(b.lambda_values[i].real()) << ","
          << format_g17(b.lambda_values[i].imag()) << "\n";
      }
      std::cout << "wrote " << out2 << "; lambda1 = ("
                << format_g17(b.lambda1.real()) << ","
                << format_g17(b.lambda1.imag()) << "), lambda2 = ("
                << format_g17(b.lambda2.real()) << ","
                << format_g17(b.lambda2.imag()) << "), b = "
                << format_g17(b.diffusion) << "\n";
    });

    auto* st = spec_cmd->add_subcommand("stability-report", "(D1)/(D2) report");
    static std::string fixture3 = "advection-diffusion", out3 = "stability.json";
    static int K3 = 16, nxi3 = 64;
    st->add_option("--profile", fixture3);
    st->add_option("--K", K3);
    st->add_option("--xi-samples", nxi3);
    st->add_option("--out", out3);
    st->callback([] {
      WaveProfile prof = profile_by_name(fixture3, 64);
      StabilityReport rep = check_diffusive_stability(prof, K3, nxi3);
      json j{{"D1", rep.d1},       {"gap", rep.gap},
             {"D2", rep.d2},       {"theta", rep.theta},
             {"worst_xi", rep.worst_xi}};
      if (rep.d1) {
        SpectralBranch b = critical_branch(prof, K3, 0.1 * M_PI, 21);
        j["b"] = b.diffusion;
        j["lambda1"] = {b.lambda1.real(), b.lambda1.imag()};
        j["lambda2"] = {b.lambda2.real(), b.lambda2.imag()};
      }
      std::ofstream f(out3);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
    });
  }

  // ---- resolvent ----
  auto* res_cmd = app.add_subcommand("resolvent", "resolvent kernels");
  res_cmd->require_subcommand(1);
  {
    auto* kr = res_cmd->add_subcommand("kernel", "kernel on a grid, CSV");
    static std::string lam = "1,0", kind = "periodic",
                       fixture = "advection-diffusion", out = "kernel.csv";
    static double xi = 0.3;
    static int grid = 64;
    kr->add_option("--lambda", lam);
    kr->add_option("--xi", xi);
    kr->add_option("--kind", kind)->check(CLI::IsMember({"whole", "periodic"}));
    kr->add_option("--profile", fixture);
    kr->add_option("--grid", grid);
    kr->add_option("--out", out);
    kr->callback([] {
      auto [re, im] = parse_complex(lam);
      WaveProfile prof = profile_by_name(fixture, 64);
      FloquetSystem sys(prof, xi, Complex(re, im));
      std::vector<double> g(grid);
      for (int i = 0; i < grid; ++i) g[i] = static_cast<double>(i) / grid;
      KernelField f = kind == "whole" ? whole_line_kernel(sys, g, g)
                                      : periodic_kernel(sys, g, g);
      std::ofstream o(out);
      o << "x,y,re_G,im_G,re_Gp,im_Gp\n";
      for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
          o << format_g17(g[i]) << "," << format_g17(g[j]) << ","
            << format_g17(f.G(i, j)(0, 0).real()) << ","
            << format_g17(f.G(i, j)(0, 0).imag()) << ","
            << format_g17(f.Gp(i, j)(0, 0).real()) << ","
            << format_g17(f.Gp(i, j)(0, 0).imag()) << "\n";
        }
      }
      std::cout << "wrote " << out << "\n";
    });

    auto* im_cmd = res_cmd->add_subcommand("images-check", "method of images");
    static std::string lam2 = "1,0", fixture2 = "advection-diffusion";
    static double xi2 = 0.3;
    static int J = 10;
    im_cmd->add_option("--lambda", lam2);
    im_cmd->add_option("--xi", xi2);
    im_cmd->add_option("--J", J);
    im_cmd->add_option("--profile", fixture2);
    im_cmd->callback([] {
      auto [re, im] = parse_complex(lam2);
      WaveProfile prof = profile_by_name(fixture2, 64);
      FloquetSystem sys(prof, xi2, Complex(re, im));
      std::vector<double> g;
      for (int i = 0; i < 16; ++i) g.push_back(i / 16.0);
      ImagesCheck chk = method_of_images_check(sys, J, g, g);
      std::cout << "max deviation at J=" << J << ": "
                << format_g17(chk.max_deviation)
                << "\ndecay rate c = " << format_g17(chk.decay_rate)
                << "\ntail bound = " << format_g17(chk.tail_bound) << "\n";
    });

    auto* hf = res_cmd->add_subcommand("hf-scan", "high-frequency modulus");
    static std::string fixture3 = "advection-diffusion";
    static double xi3 = 0.0, angle = 0.0, lo = 10.0, hi = 1e4;
    static int nl = 13;
    hf->add_option("--profile", fixture3);
    hf->add_option("--xi", xi3);
    hf->add_option("--ray-angle", angle);
    hf->add_option("--lambda-min", lo);
    hf->add_option("--lambda-max", hi);
    hf->add_option("--n", nl);
    hf->callback([] {
      WaveProfile prof = profile_by_name(fixture3, 64);
      std::vector<Complex> ls;
      for (int i = 0; i < nl; ++i) {
        ls.push_back(std::polar(lo * std::pow(hi / lo,
                                              static_cast<double>(i) / (nl - 1)),
                                angle));
      }
      HighFrequencyFit fit = high_frequency_modulus_check(prof, xi3, ls);
      std::cout << "C = " << format_g17(fit.C)
                << ", rate = " << format_g17(fit.rate)
                << ", scatter = " << format_g17(fit.scatter) << "\n";
      for (size_t i = 0; i < ls.size(); ++i) {
        std::cout << "|lambda| = " << format_g17(std::abs(ls[i]))
                  << "  sup |G| |lambda|^1/2 = "
                  << format_g17(fit.sup_scaled[i]) << "\n";
      }
    });
  }

  // ---- green ----
  auto* green_cmd = app.add_subcommand("green", "Green function synthesis");
  green_cmd->require_subcommand(1);
  {
    auto* sy = green_cmd->add_subcommand("synth", "field at one time, CSV");
    static std::string route = "bloch", fixture = "advection-diffusion",
                       out = "green.csv";
    static double t = 1.0;
    sy->add_option("--t", t);
    sy->add_option("--route", route)
        ->check(CLI::IsMember({"bloch", "direct", "laplace"}));
    sy->add_option("--profile", fixture);
    sy->add_option("--out", out);
    sy->callback([] {
      WaveProfile prof = profile_by_name(fixture, 64);
      double W = t + 8.0 * std::sqrt(t) + 2.0;
      std::vector<double> xs, ys = {0.0};
      for (int i = 0; i < 240; ++i) xs.push_back(-W + 2.0 * W * i / 239);
      GreenField f = route == "direct" ? green_direct(prof, t, xs, ys)
                                       : green_bloch(prof, t, xs, ys);
      if (route == "laplace") {
        for (size_t i = 0; i < xs.size(); ++i) {
          f.values[i] = green_laplace_point(prof, t, xs[i], 0.0);
        }
      }
      std::ofstream o(out);
      o << "x,y,re_G,im_G\n";
      for (size_t i = 0; i < xs.size(); ++i) {
        o << format_g17(xs[i]) << ",0," << format_g17(f.value(i, 0)(0, 0).real())
          << "," << format_g17(f.value(i, 0)(0, 0).imag()) << "\n";
      }
      std::cout << "wrote " << out << "\n";
    });

    auto* sp = green_cmd->add_subcommand("split", "leading-term split report");
    static std::string fixture2 = "advection-diffusion", report = "split.json";
    sp->add_option("--profile", fixture2);
    sp->add_option("--report", report);
    sp->callback([] {
      WaveProfile prof = profile_by_name(fixture2, 64);
      SpectralBranch br = critical_branch(prof, 16, 0.1 * M_PI, 21);
      LeadingKernel lead(br);
      std::vector<GreenField> fields;
      std::vector<double> ys = {0.0, 0.25, 0.5};
      for (double tt : {2.0, 4.0, 8.0, 16.0, 32.0, 50.0}) {
        double W = std::abs(lead.drift()) * tt +
                   8.0 * std::sqrt(lead.diffusion() * tt) + 2.0;
        std::vector<double> xs(160);
        for (int i = 0; i < 160; ++i) xs[i] = -W + 2.0 * W * i / 159;
        fields.push_back(green_bloch(prof, tt, xs, ys));
      }
      LeadingTermSplit split = leading_split(fields, br);
      json j{{"a", lead.drift()},
             {"b", lead.diffusion()},
             {"C_res", split.C_res},
             {"M_res", split.M_res},
             {"slope", split.sup_slope.slope},
             {"scatter", split.scatter}};
      std::ofstream f(report);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
    });
  }

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "nonlinear model problems");
  sim_cmd->require_subcommand(1);
  {
    auto* hq = sim_cmd->add_subcommand("heat-q", "u_t = u_xx + u^q decay report");
    static int q = 4, cls = 1;
    static double E0 = 0.01, T = 500.0;
    static std::string out = "heat_q.json";
    hq->add_option("--q", q);
    hq->add_option("--class", cls)->check(CLI::Range(1, 3));
    hq->add_option("--E0", E0);
    hq->add_option("--T", T);
    hq->add_option("--out", out);
    hq->callback([] {
      InitialData u0;
      u0.cls = static_cast<DataClass>(cls);
      u0.E0 = E0;
      DecayReport rep = decay_report_heat(u0, q, T, {1, 2, 0});
      json j{{"U_star", rep.U_star},
             {"U0", rep.U0},
             {"U_slope", rep.U_slope.slope}};
      for (auto& [p, s] : rep.norm_slopes) {
        j["norm_slope"][p == 0 ? "inf" : std::to_string(p)] = s.slope;
      }
      for (auto& [p, s] : rep.dev_slopes) {
        j["deviation_slope"][p == 0 ? "inf" : std::to_string(p)] = s.slope;
      }
      std::ofstream f(out);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
    });

    auto* md = sim_cmd->add_subcommand("modulation", "phase-tracking pipeline");
    static std::string fixture = "manufactured", out2 = "modulation.json";
    static double E02 = 0.005, T2 = 20.0;
    md->add_option("--profile", fixture);
    md->add_option("--E0", E02);
    md->add_option("--T", T2);
    md->add_option("--out", out2);
    md->callback([] {
      WaveProfile prof = profile_by_name(fixture, 64);
      SpectralBranch br = critical_branch(prof, 16, 0.1 * M_PI, 21);
      InitialData v0;
      v0.cls = DataClass::GaussianEnvelope;
      v0.E0 = E02;
      v0.M = 2.0;
      ModulationOptions mopts;
      mopts.T_final = T2;
      ModulationResult r = modulation_pipeline(prof, br, v0, mopts);
      json j{{"iterations", r.iterations},
             {"converged", r.converged},
             {"iteration_changes", r.iteration_changes},
             {"split_identity_error", r.split_identity_error},
             {"linear_identity_error", r.linear_identity_error},
             {"Ubar_star", r.Ubar_star}};
      std::ofstream f(out2);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
    });
  }

  // ---- report / run ----
  {
    auto* rp = app.add_subcommand("report", "pretty-print a JSON report");
    static std::string path;
    rp->add_option("file", path)->required();
    rp->callback([] {
      std::ifstream f(path);
      if (!f) throw CLI::ValidationError("cannot open " + path);
      json j;
      f >> j;
      std::cout << j.dump(2) << "\n";
    });

    auto* run = app.add_subcommand("run", "run a config-file experiment");
    static std::string cfg_path;
    run->add_option("config", cfg_path)->required();
    run->callback([] {
      ExperimentConfig cfg = ExperimentConfig::parse_file(cfg_path);
      RunResult r = run_experiment(cfg);
      for (const std::string& a : r.artifacts) std::cout << a << "\n";
    });
  }

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
