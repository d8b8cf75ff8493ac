#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/freeops.hpp"
#include "rootflow/kz.hpp"
#include "rootflow/measure.hpp"
#include "rootflow/pde.hpp"
#include "rootflow/polylab.hpp"
#include "rootflow/report.hpp"
#include "rootflow/transforms.hpp"
#include "rootflow/verify.hpp"

using namespace rootflow;

namespace {

constexpr int kExitFailed = 1;  // verify: some tolerance missed
constexpr int kExitUsage = 2;   // bad configuration
constexpr int kExitError = 3;   // numeric or I/O failure

// Where CSV goes: a file, or stdout for "-" and when no path is given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    require(file_->good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return std::cout.flush(), void();
    file_->close();
    require(!file_->fail(), ErrorCode::io, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config, "cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::config,
            path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Config values fill options the command line left unset.
void apply_config(CLI::App& sub, const std::map<std::string, std::string>& config) {
  for (const auto& [key, value] : config) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      fail(ErrorCode::config, "config key '" + key + "' is not an option of '" +
                                  sub.get_name() + "'");
    }
    if (opt->count() > 0) continue;
    std::stringstream parts(value);
    if (opt->get_expected_max() > 1) {
      for (std::string item; std::getline(parts, item, ',');) opt->add_result(item);
    } else {
      opt->add_result(value);
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      fail(ErrorCode::config, "config key '" + key + "': " + e.what());
    }
  }
}

FamilyTag family(const std::string& name, const std::string& params) {
  return FamilyTag::parse(name, params);
}

void write_measure(const std::string& out, const RadialQuantile& m) {
  Output o(out);
  write_quantile_csv(o.stream(), m);
  o.close();
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-level tools for differentiation flows and free convolution powers"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Plain 'key = value' file; command-line flags win")
      ->check(CLI::ExistingFile);

  const std::size_t grid_default = default_grid_size();
  std::size_t grid = grid_default;
  std::string out_path, family_name, family_params;
  auto add_family = [&](CLI::App* sub, bool required = true) {
    auto* o = sub->add_option("--family", family_name,
                              "Family tag: " + join(family_names()) + " (params after ':')");
    if (required) o->required();
    sub->add_option("--params", family_params, "Family parameters, e.g. k=2 or alpha=1,theta=2");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", grid, "Probability nodes (default from ROOTFLOW_GRID)")
        ->default_val(grid_default)
        ->check(CLI::Range(std::size_t{2}, std::size_t{10'000'000}));
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "CSV destination; '-' or omitted means stdout");
  };

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "Closed-form family as a quantile table");
  add_family(catalog_cmd);
  add_grid(catalog_cmd);
  add_out(catalog_cmd);
  bool as_cdf = false;
  catalog_cmd->add_flag("--cdf", as_cdf, "Write r,F on an equispaced radius grid instead");

  // transforms
  auto* transforms_cmd = app.add_subcommand("transforms", "S-transform of a family");
  add_family(transforms_cmd);
  add_grid(transforms_cmd);
  add_out(transforms_cmd);
  std::vector<double> eval_s;
  transforms_cmd->add_option("--eval-s", eval_s, "Points z in (-1,0)")
      ->delimiter(',')
      ->required();

  // oplus
  auto* oplus_cmd = app.add_subcommand("oplus", "Fractional free convolution power");
  add_family(oplus_cmd);
  add_grid(oplus_cmd);
  add_out(oplus_cmd);
  double k_power = 2.0;
  oplus_cmd->add_option("--k", k_power, "Power k >= 1")->required();

  // commutator
  auto* commutator_cmd = app.add_subcommand("commutator", "Brown measure of xy - yx");
  std::string x_tag, y_tag;
  commutator_cmd->add_option("--x", x_tag, "Family of x")->required();
  commutator_cmd->add_option("--y", y_tag, "Family of y")->required();
  add_grid(commutator_cmd);
  add_out(commutator_cmd);

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "Differentiation flow of a root measure");
  add_family(flow_cmd);
  add_grid(flow_cmd);
  add_out(flow_cmd);
  double flow_t = 0.5;
  std::string rescale = "none";
  double alpha = 0.0;
  flow_cmd->add_option("--t", flow_t, "Flow time in [0,1)")->required();
  flow_cmd->add_option("--rescale", rescale, "none, gauss_lucas or stable");
  flow_cmd->add_option("--alpha", alpha, "Tail index for --rescale stable");

  // kz
  auto* kz_cmd = app.add_subcommand("kz", "Coefficient profiles and root measures");
  kz_cmd->require_subcommand(1);
  auto* to_profile = kz_cmd->add_subcommand("to-profile", "Measure to coefficient magnitudes");
  add_family(to_profile);
  add_out(to_profile);
  std::size_t kz_n = 500;
  to_profile->add_option("--n", kz_n, "Degree")->default_val(500);
  auto* to_measure = kz_cmd->add_subcommand("to-measure", "Coefficient CSV to root measure");
  std::string profile_csv;
  to_measure->add_option("--profile", profile_csv, "CSV with columns k,log_magnitude")
      ->required()
      ->check(CLI::ExistingFile);
  add_grid(to_measure);
  add_out(to_measure);

  // polylab
  auto* polylab_cmd = app.add_subcommand("polylab", "Monte Carlo derivative experiment");
  std::string poly_profile = "kac", sampler = "gaussian";
  ExperimentConfig cfg;
  bool timing = false;
  polylab_cmd->add_option("--profile", poly_profile, "kac, taylor, stable[:l], elliptic[:w]");
  polylab_cmd->add_option("--n", cfg.n, "Degree")->default_val(cfg.n);
  polylab_cmd->add_option("--t", cfg.t, "Fraction of derivatives")->default_val(cfg.t);
  polylab_cmd->add_option("--trials", cfg.trials, "Number of trials")->default_val(cfg.trials);
  polylab_cmd->add_option("--seed", cfg.seed, "Master seed")->default_val(cfg.seed);
  polylab_cmd->add_option("--sampler", sampler, "gaussian, cauchy or unit_modulus");
  polylab_cmd->add_option("--threads", cfg.threads, "Worker threads, 0 = all cores");
  polylab_cmd->add_option("--tol", cfg.aberth.tol, "Aberth tolerance")->default_val(cfg.aberth.tol);
  polylab_cmd->add_option("--max-iter", cfg.aberth.max_iter, "Aberth iteration cap")
      ->default_val(cfg.aberth.max_iter);
  polylab_cmd->add_flag("--timing", timing, "Fill the wall-clock seconds column");
  add_out(polylab_cmd);

  // pde
  auto* pde_cmd = app.add_subcommand("pde", "Method-of-lines CDF evolution");
  std::string initial = "taylor", form = "cdf";
  double t_end = 0.5, dt = 1e-4;
  std::size_t nodes = 2000, record_every = 0;
  pde_cmd->add_option("--initial", initial, "taylor, kac (from t = 0.1), stationary or smooth")
      ->check(CLI::IsMember({"taylor", "kac", "stationary", "smooth"}));
  pde_cmd->add_option("--form", form, "cdf or rescaled")->check(CLI::IsMember({"cdf", "rescaled"}));
  pde_cmd->add_option("--t-end", t_end, "Final time")->default_val(t_end);
  pde_cmd->add_option("--nodes", nodes, "Spatial cells M")->default_val(nodes);
  pde_cmd->add_option("--dt", dt, "Largest time step")->default_val(dt);
  pde_cmd->add_option("--record-every", record_every, "Keep every k-th step (0: first and last)");
  add_out(pde_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run acceptance checks");
  std::string suite = "all";
  std::vector<double> verify_t;
  VerifyOptions vopts;
  verify_cmd->add_option("suite,--suite", suite, "Suite: " + join(Verifier::suite_names()))
      ->check(CLI::IsMember(Verifier::suite_names()));
  add_family(verify_cmd, false);
  verify_cmd->add_option("--t", verify_t, "Flow times for a single-family bridge check")
      ->delimiter(',');
  verify_cmd->add_option("--seed", vopts.seed, "Monte Carlo master seed")->default_val(vopts.seed);
  verify_cmd->add_option("--threads", vopts.threads, "Monte Carlo threads, 0 = all cores");
  verify_cmd->add_flag("--timing", timing, "Add wall-clock rows");
  verify_cmd->add_option("--grid", vopts.grid, "Probability nodes")->default_val(vopts.grid);
  add_out(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!config_path.empty()) {
      const auto config = read_config(config_path);
      CLI::App* active = app.get_subcommands().front();
      if (active == kz_cmd) active = kz_cmd->get_subcommands().front();
      apply_config(*active, config);
    }

    const auto tag = [&] { return family(family_name, family_params); };
    const auto probs = [&] { return chebyshev_grid(grid); };

    if (*catalog_cmd) {
      const auto t = tag();
      if (as_cdf) {
        const auto m = catalog::make(t, probs());
        const double hi = m.quantile(1.0 - 1e-6);
        std::vector<double> radii;
        for (std::size_t i = 0; i < grid; ++i) radii.push_back(hi * i / (grid - 1));
        Output o(out_path);
        write_cdf_csv(o.stream(), m, radii);
        o.close();
      } else {
        write_measure(out_path, catalog::make(t, probs()));
      }
    } else if (*transforms_cmd) {
      const auto s = s_from_quantile(catalog::make(tag(), probs()));
      Output o(out_path);
      o.stream() << "z,S\n";
      for (double z : eval_s) o.stream() << format_double(z) << ',' << format_double(s(z)) << '\n';
      o.close();
    } else if (*oplus_cmd) {
      write_measure(out_path, oplus_power(catalog::make(tag(), probs()), k_power).on_grid(probs()));
    } else if (*commutator_cmd) {
      const auto x = catalog::make(FamilyTag::parse(x_tag), probs());
      const auto y = catalog::make(FamilyTag::parse(y_tag), probs());
      write_measure(out_path, commutator(x, y).on_grid(probs()));
    } else if (*flow_cmd) {
      FlowParams params;
      params.t = flow_t;
      params.rescale_mode = parse_rescale_mode(rescale);
      if (alpha > 0.0) params.alpha = alpha;
      write_measure(out_path, flow(catalog::make(tag(), probs()), params).on_grid(probs()));
    } else if (*to_profile) {
      const auto pc = measure_to_profile(catalog::make(tag()), kz_n);
      Output o(out_path);
      write_coeff_csv(o.stream(), pc.log_coeffs);
      o.close();
    } else if (*to_measure) {
      std::ifstream in(profile_csv);
      const auto coeffs = read_coeff_csv(in);
      write_measure(out_path, profile_to_measure(profile_from_coeffs(coeffs)).on_grid(probs()));
    } else if (*polylab_cmd) {
      cfg.profile = PolyProfile::parse(poly_profile);
      cfg.sampler = parse_sampler(sampler);
      cfg.aberth.seed = cfg.seed;
      const auto report = derivative_experiment(cfg);
      Output o(out_path);
      write_report_csv(o.stream(), report, timing);
      o.close();
      std::cerr << "mean_ks_flow=" << format_double(report.mean_ks_flow)
                << " mean_ks_bridge=" << format_double(report.mean_ks_bridge)
                << " gauss_lucas_violations=" << report.gauss_lucas_violations << '\n';
    } else if (*pde_cmd) {
      PdeState s0;
      if (initial == "taylor") {
        s0 = make_state(catalog::make(FamilyTag::taylor_disk()), uniform_nodes(nodes, 1.0));
      } else if (initial == "kac") {
        s0 = make_state(catalog::make(FamilyTag::kac_derivative(0.1)), uniform_nodes(nodes, 1.0),
                        0.1);
      } else if (initial == "stationary") {
        s0 = make_state([](double x) { return x / (1.0 + x); }, stretched_nodes(nodes, 1.0, 1e6));
      } else {
        s0 = make_state([](double x) { return x >= 1.0 ? 1.0 : 1.0 - (1.0 - x) * (1.0 - x); },
                        uniform_nodes(nodes, 1.0));
      }
      std::vector<PdeState> traj;
      const auto last = integrate(s0, t_end, form == "cdf" ? PdeForm::cdf : PdeForm::rescaled,
                                  {dt, record_every}, &traj);
      Output o(out_path);
      write_trajectory_csv(o.stream(), traj);
      o.close();
      std::cerr << "projections=" << last.projections
                << " max_projection=" << format_double(last.max_projection) << '\n';
    } else if (*verify_cmd) {
      Verifier verifier(vopts);
      std::vector<ExperimentReport> reports;
      if (!family_name.empty()) {
        require(suite == "bridge", ErrorCode::config, "--family applies to the bridge suite only");
        ExperimentReport r;
        const auto t = tag();
        r.id = "bridge-" + t.to_string();
        r.param("family", t.to_string());
        r.param("grid", std::to_string(vopts.grid));
        const auto g = chebyshev_grid(vopts.grid);
        try {
          const auto m = catalog::make(t, g);
          for (double tt : verify_t.empty() ? std::vector<double>{0.25, 0.5, 0.75} : verify_t) {
            r.metric("bridge.t=" + format_double(tt), bridge_residual(m, tt, g), 1e-9);
          }
        } catch (const Error& e) {
          r.error = std::string(code_name(e.code()));
          r.error_message = e.what();
        }
        reports.push_back(std::move(r));
      } else {
        reports = verifier.run_suite(suite);
      }
      Output o(out_path);
      write_experiment_csv(o.stream(), reports, timing);
      o.close();
      bool ok = true;
      for (const auto& r : reports) {
        std::cerr << r.id << ": " << (r.passed() ? "PASS" : "FAIL");
        if (!r.error.empty()) std::cerr << " [" << r.error << "] " << r.error_message;
        std::cerr << '\n';
        ok = ok && r.passed();
      }
      return ok ? 0 : kExitFailed;
    }
  } catch (const Error& e) {
    std::cerr << "error[" << code_name(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::config ? kExitUsage : kExitError;
  }
  return 0;
}
