// Copyright 2026 The kerrgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kerrgate/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kerrgate/csv.hpp"
#include "kerrgate/svg.hpp"
#include "kerrgate/sweep.hpp"

namespace kerrgate::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";
constexpr double kPi = std::numbers::pi;

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" + std::string(text) +
                                "' as a number");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& text, std::string_view what) {
  std::vector<int> out;
  for (const std::string& item : split(text, ',')) {
    const double v = parse_double(item, what);
    if (v != std::floor(v) || std::abs(v) > 1e6) {
      throw std::invalid_argument(std::string(what) + " entries must be integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Json chi_json(const Coupling& chi) {
  if (chi.is_infinite()) return "inf";
  return chi.value();
}

struct QuadFlags {
  int nodes = 129;
  double window = 8.0;
  double tol = 1e-6;
  int max_refinements = 4;

  void add_to(CLI::App* app) {
    app->add_option("--nodes", nodes, "Gauss-Legendre nodes per axis at the base level");
    app->add_option("--window", window, "Half width of the integration window in units of sigma");
    app->add_option("--tol", tol, "Convergence tolerance on the overlap");
    app->add_option("--max-refinements", max_refinements, "Maximum number of node doublings");
  }
  QuadratureSpec spec() const {
    QuadratureSpec s;
    s.nodes_per_axis = nodes;
    s.window_halfwidth = window;
    s.convergence_tol = tol;
    s.max_refinements = max_refinements;
    s.validate();
    return s;
  }
};

Json quad_json(const QuadratureSpec& s) {
  return Json{{"nodes", s.nodes_per_axis},
              {"window", s.window_halfwidth},
              {"tol", s.convergence_tol},
              {"max_refinements", s.max_refinements}};
}

/// Rotating frame: every site sits at delta = 0 and omega0 is the carrier
/// detuning.
struct PhysicsFlags {
  std::string arrangement = "counter-n";
  int sites = 0;
  double gamma = 1.0;
  double omega0 = 0.0;
  std::string chi = "inf";
  int rounds = 0;

  void add_to(CLI::App* app) {
    app->add_option("--arrangement", arrangement, "single, co-2, counter-2 or counter-n");
    app->add_option("--sites", sites, "Number of sites (0: implied by the arrangement)");
    app->add_option("--gamma", gamma, "Site decay rate");
    app->add_option("--omega0", omega0, "Carrier detuning from the sites");
    app->add_option("--chi", chi, "Cross-Kerr coupling, or inf for the analytic limit");
    app->add_option("--rounds", rounds, "Deformation rounds applied to the input packets");
  }
  Experiment experiment() const {
    const Arrangement arr = parse_arrangement(arrangement);
    SiteParams site;
    site.gamma = gamma;
    site.chi = parse_coupling(chi);
    site.validate();
    int n = sites;
    if (n == 0) n = (arr == Arrangement::CoProp2 || arr == Arrangement::CounterProp2) ? 2 : 1;
    if (!std::isfinite(omega0)) throw std::invalid_argument("omega0 must be finite");
    Experiment e{ChainConfig::make(arr, site, n), omega0, rounds};
    e.packet(1.0);  // validates the deformation settings
    return e;
  }
};

Json experiment_json(const Experiment& e) {
  return Json{{"arrangement", std::string(to_string(e.chain.arrangement()))},
              {"sites", e.chain.n_sites()},
              {"gamma", e.chain.site(0).gamma},
              {"omega0", e.omega0},
              {"chi", chi_json(e.chain.site(0).chi)},
              {"rounds", e.deformation_rounds}};
}

struct SigmaFlags {
  double sigma_min;
  double sigma_max;
  int points;
  std::string spacing = "log";

  void add_to(CLI::App* app) {
    app->add_option("--sigma-min", sigma_min, "Smallest bandwidth");
    app->add_option("--sigma-max", sigma_max, "Largest bandwidth");
    app->add_option("--points", points, "Number of bandwidths");
    app->add_option("--spacing", spacing, "log or linear");
  }
  Spacing parsed_spacing() const {
    if (spacing == "log") return Spacing::Log;
    if (spacing == "linear") return Spacing::Linear;
    throw std::invalid_argument("spacing must be 'log' or 'linear', got '" + spacing + "'");
  }
};

/// Everything a command writes into its output directory. Nothing touches
/// the file system until write_all, after all results are in.
class Outputs {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }
  void add_csv(std::string name, const CsvTable& table) {
    std::ostringstream os;
    table.write(os);
    add(std::move(name), os.str());
  }
  Json names() const {
    Json j = Json::array();
    for (const auto& f : files_) j.push_back(f.first);
    j.push_back("manifest.json");
    return j;
  }
  void write_all(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      f << content;
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Fully resolved command line of a subcommand: every option with either its
/// given or its default value, so a rerun does not depend on defaults.
std::vector<std::string> canonical_args(const CLI::App& sub) {
  std::vector<std::string> out{sub.get_name()};
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty()) continue;
    const std::string& name = names.front();
    if (name == "help" || name == "out-dir" || name == "threads") continue;
    if (opt->get_expected_max() == 0) {
      if (opt->count() > 0) out.push_back("--" + name);
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      for (const std::string& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    out.push_back("--" + name);
    out.push_back(value);
  }
  return out;
}

struct Run {
  const CLI::App* sub = nullptr;
  std::string out_dir = ".";
  bool svg = false;
  int threads = 0;
  bool converged = true;
  Outputs outputs;
  Json summary = Json::object();

  void note(const FidelityResult& r) { converged = converged && r.converged; }

  int finish(const QuadratureSpec& spec, std::ostream& out) {
    const std::vector<std::string> args = canonical_args(*sub);
    Json settings = Json::object();
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
        settings[args[i].substr(2)] = args[i + 1];
        ++i;
      } else {
        settings[args[i].substr(2)] = true;
      }
    }
    Json manifest{{"tool", "kerrgate"},
                  {"version", kVersion},
                  {"command", sub->get_name()},
                  {"argv", args},
                  {"settings", settings},
                  {"quadrature", quad_json(spec)},
                  {"converged", converged},
                  {"files", outputs.names()}};
    outputs.add("manifest.json", manifest.dump(2) + "\n");
    outputs.write_all(out_dir);
    Json report = summary;
    report["out_dir"] = out_dir;
    report["converged"] = converged;
    out << report.dump(2) << "\n";
    return converged ? kExitOk : kExitNumerics;
  }
};

void add_output_flags(CLI::App* app, Run& run) {
  app->add_option("--out-dir", run.out_dir, "Directory for CSV, JSON and SVG outputs");
  app->add_flag("--svg", run.svg, "Also render static SVG charts");
}

std::vector<std::string> fidelity_header() { return {"sigma", "arrangement", "f_pi", "f_opt", "phi_opt"}; }

std::vector<std::string> fidelity_row(const SweepRecord& r, const Experiment& e) {
  return {format_number(r.sigma), std::string(to_string(e.chain.arrangement())), format_number(r.result.f_pi),
          format_number(r.result.f_opt), format_number(r.result.phi_opt)};
}

Json maximum_json(const SigmaMaximum& m) {
  return Json{{"sigma_max", m.sigma_max},
              {"f_max", m.f_max},
              {"phi_opt", m.result.phi_opt},
              {"f_opt", m.result.f_opt},
              {"converged", m.result.converged},
              {"evaluations", m.evaluations}};
}

Json fit_json(const PowerLawFit& f) {
  return Json{{"amplitude", f.amplitude}, {"exponent", f.exponent}, {"residual", f.residual},
              {"n_lo", f.n_lo},           {"n_hi", f.n_hi},         {"points", f.points}};
}

// ---------------------------------------------------------------------------

int cmd_point(const PhysicsFlags& p, const QuadFlags& q, double sigma, int threads,
              std::ostream& out) {
  const Experiment e = p.experiment();
  const QuadratureSpec spec = q.spec();
  const FidelityResult r = evaluate(e.packet(sigma), e.chain, spec, threads);
  Json params = experiment_json(e);
  params["sigma"] = sigma;
  const Json j{{"params", params},
               {"overlap", {{"re", r.overlap.real()}, {"im", r.overlap.imag()}}},
               {"f_pi", r.f_pi},
               {"phi_opt", r.phi_opt},
               {"f_opt", r.f_opt},
               {"f2_pi", avg_fidelity_product(r.overlap, kPi)},
               {"quad",
                {{"nodes", r.nodes_used},
                 {"window", spec.window_halfwidth},
                 {"converged", r.converged},
                 {"refinements", r.refinements},
                 {"last_change", r.last_change}}}};
  out << j.dump(2) << "\n";
  return r.converged ? kExitOk : kExitNumerics;
}

int cmd_scan(Run& run, const PhysicsFlags& p, const QuadFlags& q, const SigmaFlags& s,
             std::ostream& out) {
  const Experiment e = p.experiment();
  const QuadratureSpec spec = q.spec();
  const auto records = scan_sigma(e, s.sigma_min, s.sigma_max, s.points, s.parsed_spacing(), spec,
                                  run.threads);
  CsvTable table({"sigma", "arrangement", "n_sites", "f_pi", "f_opt", "phi_opt", "f2_pi",
                  "overlap_re", "overlap_im", "converged"});
  ChartSeries f1{"F1(pi)", {}, {}};
  for (const SweepRecord& r : records) {
    run.note(r.result);
    table.add_row({format_number(r.sigma), std::string(to_string(e.chain.arrangement())),
                   std::to_string(e.chain.n_sites()), format_number(r.result.f_pi),
                   format_number(r.result.f_opt), format_number(r.result.phi_opt),
                   format_number(avg_fidelity_product(r.result.overlap, kPi)),
                   format_number(r.result.overlap.real()), format_number(r.result.overlap.imag()),
                   r.result.converged ? "1" : "0"});
    f1.x.push_back(r.sigma);
    f1.y.push_back(r.result.f_pi);
  }
  run.outputs.add_csv("scan.csv", table);
  if (run.svg) {
    run.outputs.add("scan.svg",
                    render_line_chart({f1}, {"Average gate fidelity", "sigma", "F1(pi)",
                                             s.parsed_spacing() == Spacing::Log, false}));
  }
  run.summary["experiment"] = experiment_json(e);
  run.summary["points"] = records.size();
  return run.finish(spec, out);
}

struct Fig2Flags {
  std::string counter = "0,10,10000";
  std::string co = "0,6,2.67";
  std::string single = "1.1,4.5,5";
};

Experiment triple_experiment(const std::string& triple, Arrangement arr) {
  const std::vector<std::string> parts = split(triple, ',');
  if (parts.size() != 3) {
    throw std::invalid_argument("parameter triple must be 'omega0,gamma,chi', got '" + triple + "'");
  }
  PhysicsFlags p;
  p.arrangement = std::string(to_string(arr));
  p.omega0 = parse_double(parts[0], "omega0");
  p.gamma = parse_double(parts[1], "gamma");
  p.chi = parts[2];
  return p.experiment();
}

int cmd_fig2(Run& run, const Fig2Flags& f, const QuadFlags& q, const SigmaFlags& s,
             std::ostream& out) {
  const QuadratureSpec spec = q.spec();
  const std::pair<const char*, Experiment> columns[] = {
      {"counter", triple_experiment(f.counter, Arrangement::CounterProp2)},
      {"co", triple_experiment(f.co, Arrangement::CoProp2)},
      {"single", triple_experiment(f.single, Arrangement::Single)}};
  Json summary = Json::array();
  std::vector<ChartSeries> f_series;
  std::vector<ChartSeries> phi_series;
  for (const auto& [tag, e] : columns) {
    const auto records = scan_sigma(e, s.sigma_min, s.sigma_max, s.points, s.parsed_spacing(),
                                    spec, run.threads);
    CsvTable table(fidelity_header());
    ChartSeries fs{tag, {}, {}};
    ChartSeries ps{tag, {}, {}};
    for (const SweepRecord& r : records) {
      run.note(r.result);
      table.add_row(fidelity_row(r, e));
      fs.x.push_back(r.sigma);
      fs.y.push_back(r.result.f_pi);
      ps.x.push_back(r.sigma);
      ps.y.push_back(r.result.phi_opt);
    }
    run.outputs.add_csv(std::string("fig2_") + tag + ".csv", table);
    f_series.push_back(std::move(fs));
    phi_series.push_back(std::move(ps));
    const SigmaMaximum m = maximize_over_sigma(e, spec, run.threads);
    run.note(m.result);
    Json col = experiment_json(e);
    col["column"] = tag;
    col["maximum"] = maximum_json(m);
    summary.push_back(col);
  }
  run.outputs.add("fig2_summary.json", summary.dump(2) + "\n");
  if (run.svg) {
    const bool logx = s.parsed_spacing() == Spacing::Log;
    run.outputs.add("fig2_fidelity.svg",
                    render_line_chart(f_series, {"F1(pi) vs bandwidth", "sigma", "F1(pi)", logx, false}));
    run.outputs.add("fig2_phase.svg",
                    render_line_chart(phi_series, {"Optimal phase vs bandwidth", "sigma", "phi_opt",
                                                   logx, false}));
  }
  run.summary["columns"] = summary;
  return run.finish(spec, out);
}

struct Fig3Flags {
  int n_min = 1;
  int n_max = 20;
  double gamma = 1.0;
  double omega0 = 0.0;
  std::string chi = "inf";
  std::string deformed_rounds = "2";
  double fit_lo = 4;
  double fit_hi = 20;
  double target_fidelity = 0.999;
};

int cmd_fig3(Run& run, const Fig3Flags& f, const QuadFlags& q, const SigmaFlags& s,
             std::ostream& out) {
  const QuadratureSpec spec = q.spec();
  if (f.n_min < 1 || f.n_max < f.n_min) throw std::invalid_argument("need 1 <= n-min <= n-max");
  if (!(f.target_fidelity > 0.0 && f.target_fidelity < 1.0)) {
    throw std::invalid_argument("target fidelity must lie in (0, 1)");
  }
  const Coupling chi = parse_coupling(f.chi);
  std::vector<int> ns;
  for (int n = f.n_min; n <= f.n_max; ++n) ns.push_back(n);
  std::vector<int> extra_rounds;
  if (!f.deformed_rounds.empty()) extra_rounds = parse_int_list(f.deformed_rounds, "deformed rounds");
  for (const int m : extra_rounds) {
    if (m < 1 || m > 2) throw std::invalid_argument("deformed rounds must be 1 or 2");
  }

  if (s.points > 0) {
    CsvTable curves({"n", "sigma", "f_pi", "f_opt", "phi_opt"});
    std::vector<ChartSeries> series;
    for (const int n : ns) {
      const Experiment e = counter_chain_experiment(n, f.gamma, f.omega0, chi);
      const auto records = scan_sigma(e, s.sigma_min, s.sigma_max, s.points, s.parsed_spacing(),
                                      spec, run.threads);
      ChartSeries cs{"N=" + std::to_string(n), {}, {}};
      for (const SweepRecord& r : records) {
        run.note(r.result);
        curves.add_row({std::to_string(n), format_number(r.sigma), format_number(r.result.f_pi),
                        format_number(r.result.f_opt), format_number(r.result.phi_opt)});
        cs.x.push_back(r.sigma);
        cs.y.push_back(r.result.f_pi);
      }
      series.push_back(std::move(cs));
    }
    run.outputs.add_csv("fig3_curves.csv", curves);
    if (run.svg) {
      run.outputs.add("fig3_curves.svg",
                      render_line_chart(series, {"F1(pi) vs bandwidth", "sigma", "F1(pi)",
                                                 s.parsed_spacing() == Spacing::Log, false}));
    }
  }

  const auto rows = scan_n(ns, f.gamma, f.omega0, chi, spec, run.threads);
  CsvTable maxima({"n", "sigma_max", "f_max", "infidelity"});
  std::vector<FitPoint> infidelity;
  std::vector<FitPoint> sigma;
  ChartSeries inf_series{"m=0", {}, {}};
  for (const SiteScanRow& r : rows) {
    run.note(r.maximum.result);
    maxima.add_row({std::to_string(r.n_sites), format_number(r.maximum.sigma_max),
                    format_number(r.maximum.f_max), format_number(1.0 - r.maximum.f_max)});
    infidelity.push_back({static_cast<double>(r.n_sites), 1.0 - r.maximum.f_max});
    sigma.push_back({static_cast<double>(r.n_sites), r.maximum.sigma_max});
    inf_series.x.push_back(r.n_sites);
    inf_series.y.push_back(1.0 - r.maximum.f_max);
  }
  run.outputs.add_csv("fig3_maxima.csv", maxima);

  std::vector<ChartSeries> inf_chart{inf_series};
  if (!extra_rounds.empty()) {
    CsvTable deformed({"n", "rounds", "sigma_max", "f_max", "infidelity", "f_max_undeformed"});
    for (const int m : extra_rounds) {
      const auto drows = deformed_input_study(ns, m, f.gamma, f.omega0, chi, spec, run.threads);
      ChartSeries ds{"m=" + std::to_string(m), {}, {}};
      for (std::size_t i = 0; i < drows.size(); ++i) {
        const SiteScanRow& r = drows[i];
        run.note(r.maximum.result);
        deformed.add_row({std::to_string(r.n_sites), std::to_string(m),
                          format_number(r.maximum.sigma_max), format_number(r.maximum.f_max),
                          format_number(1.0 - r.maximum.f_max),
                          format_number(rows[i].maximum.f_max)});
        ds.x.push_back(r.n_sites);
        ds.y.push_back(1.0 - r.maximum.f_max);
      }
      inf_chart.push_back(std::move(ds));
    }
    run.outputs.add_csv("fig3_deformed.csv", deformed);
  }

  const PowerLawFit inf_fit = fit_power_law(infidelity, f.fit_lo, f.fit_hi);
  const PowerLawFit sigma_fit = fit_power_law(sigma, f.fit_lo, f.fit_hi);
  const TargetPrediction pred = predict_target(inf_fit, sigma_fit, 1.0 - f.target_fidelity);
  const Json fits{{"infidelity", fit_json(inf_fit)},
                  {"sigma_max", fit_json(sigma_fit)},
                  {"prediction",
                   {{"target_fidelity", f.target_fidelity},
                    {"n_exact", pred.n_exact},
                    {"n_required", pred.n_required},
                    {"sigma", pred.sigma}}}};
  run.outputs.add("fits.json", fits.dump(2) + "\n");
  if (run.svg) {
    run.outputs.add("fig3_infidelity.svg",
                    render_line_chart(inf_chart, {"Infidelity at the optimal bandwidth", "N",
                                                  "1 - F_max", true, true}));
  }
  run.summary["fits"] = fits;
  return run.finish(spec, out);
}

struct Fig4Flags {
  std::string anchors = "2,4,6,8,10";
  int n_max = 50;
  double gamma = 1.0;
};

int cmd_fig4(Run& run, const Fig4Flags& f, const QuadFlags& q, std::ostream& out) {
  const QuadratureSpec spec = q.spec();
  const std::vector<int> anchors = parse_int_list(f.anchors, "anchors");
  const auto curves = saturation_study(anchors, f.n_max, f.gamma, spec, run.threads);
  CsvTable table({"anchor", "sigma", "n", "f_pi", "infidelity", "saturation_n", "saturation_point"});
  Json summary = Json::array();
  std::vector<ChartSeries> series;
  for (const SaturationCurve& c : curves) {
    const long marked = std::lround(c.saturation_n);
    ChartSeries cs{"n=" + std::to_string(c.anchor), {}, {}};
    for (const SaturationPoint& p : c.points) {
      run.note(p.result);
      table.add_row({std::to_string(c.anchor), format_number(c.sigma), std::to_string(p.n_sites),
                     format_number(p.result.f_pi), format_number(1.0 - p.result.f_pi),
                     format_number(c.saturation_n), p.n_sites == marked ? "1" : "0"});
      cs.x.push_back(p.n_sites);
      cs.y.push_back(1.0 - p.result.f_pi);
    }
    series.push_back(std::move(cs));
    const SaturationCheck k = check_saturation(c);
    summary.push_back(Json{{"anchor", c.anchor},
                           {"sigma_max", c.sigma},
                           {"saturation_n", c.saturation_n},
                           {"max_decrease", k.max_decrease},
                           {"reference_n", k.reference_n},
                           {"reference_gain", k.reference_gain},
                           {"late_from", k.late_from},
                           {"max_late_gain", k.max_late_gain}});
  }
  run.outputs.add_csv("fig4_curves.csv", table);
  run.outputs.add("fig4_summary.json", summary.dump(2) + "\n");
  if (run.svg) {
    run.outputs.add("fig4_curves.svg",
                    render_line_chart(series, {"Infidelity at fixed bandwidth", "N", "1 - F1(pi)",
                                               false, true}));
  }
  run.summary["anchors"] = summary;
  return run.finish(spec, out);
}

int cmd_fig5(Run& run, const PhysicsFlags& p, const QuadFlags& q, const SigmaFlags& s,
             std::ostream& out) {
  const Experiment e = p.experiment();
  const QuadratureSpec spec = q.spec();
  const auto records = scan_sigma(e, s.sigma_min, s.sigma_max, s.points, s.parsed_spacing(), spec,
                                  run.threads);
  CsvTable table({"sigma", "f1_pi", "f2_pi"});
  ChartSeries f1{"F1(pi)", {}, {}};
  ChartSeries f2{"F2(pi)", {}, {}};
  for (const SweepRecord& r : records) {
    run.note(r.result);
    const double p2 = avg_fidelity_product(r.result.overlap, kPi);
    table.add_row({format_number(r.sigma), format_number(r.result.f_pi), format_number(p2)});
    f1.x.push_back(r.sigma);
    f1.y.push_back(r.result.f_pi);
    f2.x.push_back(r.sigma);
    f2.y.push_back(p2);
  }
  run.outputs.add_csv("fig5.csv", table);
  if (run.svg) {
    run.outputs.add("fig5.svg", render_line_chart({f1, f2}, {"Full vs product-state average", "sigma",
                                                             "fidelity",
                                                             s.parsed_spacing() == Spacing::Log,
                                                             false}));
  }
  run.summary["experiment"] = experiment_json(e);
  return run.finish(spec, out);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_fit(const std::string& path, const std::string& column, const std::string& n_column,
            double n_lo, double n_hi, std::ostream& out) {
  const CsvTable table = parse_csv(read_file(path));
  const std::size_t cn = table.column(n_column);
  const std::size_t cy = table.column(column);
  std::vector<FitPoint> points;
  for (const auto& row : table.rows()) {
    points.push_back({parse_double(row[cn], n_column), parse_double(row[cy], column)});
  }
  Json j = fit_json(fit_power_law(points, n_lo, n_hi));
  j["column"] = column;
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-photon scattering through cross-Kerr site chains and CPHASE gate fidelity",
               "kerrgate"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Run run;
  QuadFlags quad;
  PhysicsFlags physics;
  double sigma = 0.0;

  CLI::App* point = app.add_subcommand("point", "Evaluate one configuration, print JSON");
  physics.add_to(point);
  point->add_option("--sigma", sigma, "Photon bandwidth")->required();
  quad.add_to(point);
  point->add_option("--threads", run.threads, "Worker threads (0: KERRGATE_THREADS or all cores)");

  SigmaFlags scan_sigma_flags{1e-3, 10.0, 60};
  CLI::App* scan = app.add_subcommand("scan", "F vs bandwidth for one configuration");
  physics.add_to(scan);
  scan_sigma_flags.add_to(scan);
  quad.add_to(scan);
  add_output_flags(scan, run);
  scan->add_option("--threads", run.threads, "Worker threads");

  Fig2Flags fig2_flags;
  SigmaFlags fig2_sigma{0.05, 20.0, 60};
  CLI::App* fig2 = app.add_subcommand("fig2", "Three two-photon arrangements vs bandwidth");
  fig2->add_option("--counter", fig2_flags.counter, "omega0,gamma,chi of the counter-2 column");
  fig2->add_option("--co", fig2_flags.co, "omega0,gamma,chi of the co-2 column");
  fig2->add_option("--single", fig2_flags.single, "omega0,gamma,chi of the single-site column");
  fig2_sigma.add_to(fig2);
  quad.add_to(fig2);
  add_output_flags(fig2, run);
  fig2->add_option("--threads", run.threads, "Worker threads");

  Fig3Flags fig3_flags;
  SigmaFlags fig3_sigma{1e-3, 10.0, 60};
  CLI::App* fig3 = app.add_subcommand("fig3", "Counter-propagating chains: curves, maxima, fits");
  fig3->add_option("--n-min", fig3_flags.n_min, "Smallest chain length");
  fig3->add_option("--n-max", fig3_flags.n_max, "Largest chain length");
  fig3->add_option("--gamma", fig3_flags.gamma, "Site decay rate");
  fig3->add_option("--omega0", fig3_flags.omega0, "Carrier detuning");
  fig3->add_option("--chi", fig3_flags.chi, "Cross-Kerr coupling or inf");
  fig3->add_option("--deformed-rounds", fig3_flags.deformed_rounds,
                   "Comma separated deformation rounds to compare (empty: none)");
  fig3->add_option("--fit-lo", fig3_flags.fit_lo, "Smallest N in the power-law fits");
  fig3->add_option("--fit-hi", fig3_flags.fit_hi, "Largest N in the power-law fits");
  fig3->add_option("--target-fidelity", fig3_flags.target_fidelity,
                   "Fidelity to predict the required chain length for");
  fig3_sigma.add_to(fig3);
  quad.add_to(fig3);
  add_output_flags(fig3, run);
  fig3->add_option("--threads", run.threads, "Worker threads");

  Fig4Flags fig4_flags;
  CLI::App* fig4 = app.add_subcommand("fig4", "Saturation of the gain with chain length");
  fig4->add_option("--anchors", fig4_flags.anchors, "Chain lengths whose optimal bandwidth is held");
  fig4->add_option("--n-max", fig4_flags.n_max, "Longest chain");
  fig4->add_option("--gamma", fig4_flags.gamma, "Site decay rate");
  quad.add_to(fig4);
  add_output_flags(fig4, run);
  fig4->add_option("--threads", run.threads, "Worker threads");

  PhysicsFlags fig5_physics;
  fig5_physics.arrangement = "single";
  fig5_physics.gamma = 4.5;
  fig5_physics.omega0 = 1.1;
  fig5_physics.chi = "5";
  SigmaFlags fig5_sigma{0.05, 20.0, 60};
  CLI::App* fig5 = app.add_subcommand("fig5", "Full and product-state average fidelity");
  fig5_physics.add_to(fig5);
  fig5_sigma.add_to(fig5);
  quad.add_to(fig5);
  add_output_flags(fig5, run);
  fig5->add_option("--threads", run.threads, "Worker threads");

  std::string fit_csv;
  std::string fit_column;
  std::string fit_n_column = "n";
  double fit_lo = 4;
  double fit_hi = 20;
  CLI::App* fit = app.add_subcommand("fit", "Power-law fit y = a N^b to a CSV column");
  fit->add_option("--csv", fit_csv, "Input CSV")->required();
  fit->add_option("--column", fit_column, "Column to fit")->required();
  fit->add_option("--n-column", fit_n_column, "Column holding N");
  fit->add_option("--n-lo", fit_lo, "Smallest N in the fit");
  fit->add_option("--n-hi", fit_hi, "Largest N in the fit");

  std::string manifest_path;
  CLI::App* rerun = app.add_subcommand("rerun", "Repeat a run recorded in a manifest.json");
  rerun->add_option("--manifest", manifest_path, "Manifest of the earlier run")->required();
  rerun->add_option("--out-dir", run.out_dir, "Directory for the new outputs")->required();
  rerun->add_option("--threads", run.threads, "Worker threads");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (point->parsed()) return cmd_point(physics, quad, sigma, run.threads, out);
    if (fit->parsed()) return cmd_fit(fit_csv, fit_column, fit_n_column, fit_lo, fit_hi, out);
    if (rerun->parsed()) {
      Json manifest;
      try {
        manifest = Json::parse(read_file(manifest_path));
      } catch (const Json::exception& e) {
        throw std::invalid_argument("malformed manifest: " + std::string(e.what()));
      }
      if (!manifest.contains("argv") || !manifest["argv"].is_array() || manifest["argv"].empty()) {
        throw std::invalid_argument("manifest has no argv");
      }
      std::vector<std::string> argv = manifest["argv"].get<std::vector<std::string>>();
      if (argv.front() == "rerun" || argv.front() == "point" || argv.front() == "fit") {
        throw std::invalid_argument("manifest does not record a rerunnable command");
      }
      argv.insert(argv.end(), {"--out-dir", run.out_dir, "--threads", std::to_string(run.threads)});
      return cli::run(argv, out, err);
    }
    if (scan->parsed()) {
      run.sub = scan;
      return cmd_scan(run, physics, quad, scan_sigma_flags, out);
    }
    if (fig2->parsed()) {
      run.sub = fig2;
      return cmd_fig2(run, fig2_flags, quad, fig2_sigma, out);
    }
    if (fig3->parsed()) {
      run.sub = fig3;
      return cmd_fig3(run, fig3_flags, quad, fig3_sigma, out);
    }
    if (fig4->parsed()) {
      run.sub = fig4;
      return cmd_fig4(run, fig4_flags, quad, out);
    }
    if (fig5->parsed()) {
      run.sub = fig5;
      return cmd_fig5(run, fig5_physics, quad, fig5_sigma, out);
    }
  } catch (const BracketError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerics;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace kerrgate::cli
