// isophase command-line tool: fit S-matrix poles to phase-shift data, build
// phase-equivalent potentials from them, compute observables, and verify
// everything against the independent ODE solver.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "isophase/constants.hpp"
#include "isophase/errors.hpp"
#include "isophase/fit.hpp"
#include "isophase/potential.hpp"
#include "isophase/scattering.hpp"
#include "isophase/solver.hpp"

using nlohmann::json;
using namespace isophase;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

// ---------------------------------------------------------------------------
// formatting and manifests
// ---------------------------------------------------------------------------

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 1469598103934665603ull;
  char ch;
  while (in.get(ch)) {
    h ^= (unsigned char)ch;
    h *= 1099511628211ull;
  }
  return h;
}

struct Run {
  std::vector<std::string> argv_words;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  json config_snapshot;
  bool dry_run = false;

  void note_input(const std::string& path) { inputs.push_back(path); }

  void write_text(const std::string& path, const std::string& text) {
    outputs.push_back(path);
    if (dry_run) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
  }

  void finish() {
    if (outputs.empty() || dry_run) return;
    json m;
    m["command"] = argv_words;
    m["version"] = kVersion;
    m["config"] = config_snapshot;
    json in = json::object();
    for (const auto& p : inputs) {
      std::ostringstream hex;
      hex << "fnv1a:" << std::hex << fnv1a_file(p);
      in[p] = hex.str();
    }
    m["inputs"] = in;
    m["outputs"] = outputs;
    const std::string path = outputs.front() + ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << m.dump(2) << "\n";
  }
};

// flat key = value file; lookup order: --config-file flag, ISOPHASE_CONFIG,
// ./isophase.toml
std::map<std::string, std::string> load_flat_config(const std::string& explicit_path) {
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv("ISOPHASE_CONFIG")) path = env;
  }
  if (path.empty()) {
    std::ifstream probe("isophase.toml");
    if (probe) path = "isophase.toml";
  }
  std::map<std::string, std::string> kv;
  if (path.empty()) return kv;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\"");
      const auto e = s.find_last_not_of(" \t\r\"");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty() && !val.empty()) kv[key] = val;
  }
  return kv;
}

struct Settings {
  Constants constants;
  NumericPolicy policy;

  json snapshot() const {
    json j;
    j["mn"] = constants.m_n;
    j["hbarc"] = constants.hbar_c;
    j["grid_min"] = policy.grid_min;
    j["grid_max"] = policy.grid_max;
    j["grid_step"] = policy.grid_step;
    j["det_rel_tol"] = policy.det_rel_tol;
    j["ode_tol"] = policy.ode_tol;
    return j;
  }
};

std::vector<double> parse_range(const std::string& text, double default_step) {
  // LO:HI[:STEP]
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
  if (parts.size() < 2 || parts.size() > 3)
    throw std::invalid_argument("range must be LO:HI[:STEP]: " + text);
  const double lo = parts[0], hi = parts[1];
  const double step = parts.size() == 3 ? parts[2] : default_step;
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad range " + text);
  std::vector<double> out;
  for (double v = lo; v <= hi + 0.5 * step; v += step) out.push_back(v);
  return out;
}

// --config shorthand -> chain
ChainSpec chain_from_shorthand(const PoleSet& poles, const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon == std::string::npos ? text.size() : colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad --config parameter: " + tok);
      kv[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
    }
  }

  const auto configs = enumerate_configurations(poles);
  auto pick = [&](ConfigurationKind kind) -> ChainSpec {
    for (const auto& c : configs)
      if (c.kind == kind) return c.chain;
    throw ValidationError("pole set offers no " + std::string(to_string(kind)) + " configuration");
  };

  if (head == "shallow") return pick(ConfigurationKind::shallow);
  if (head == "deep") {
    ChainSpec chain = pick(ConfigurationKind::deep);
    const double ratio = kv.count("A3") ? kv["A3"] : (kv.count("ratio") ? kv["ratio"] : 0.0);
    for (auto& fn : chain.functions)
      if (auto* sm = std::get_if<SingularMixed>(&fn)) sm->ratio = ratio;
    return chain;
  }
  if (head == "v8") {
    if (!kv.count("kappa") || !kv.count("c"))
      throw std::invalid_argument("--config v8 needs kappa=<v>,c=<v>");
    return extend_with_pair(pick(ConfigurationKind::shallow), kv["kappa"], kv["c"]);
  }
  throw std::invalid_argument("unknown --config shorthand: " + text);
}

json observables_json(const PoleSet& poles) {
  const auto obs = observables(poles);
  json j;
  j["scattering_length_fm"] = obs.scattering_length;
  j["effective_range_fm"] = obs.effective_range;
  j["finite"] = obs.finite;
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 2;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const VerificationError*>(&e)) return 5;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isophase: phase-equivalent scattering potentials from S-matrix poles"};
  app.require_subcommand(1);

  Settings st;
  Run run;
  for (int i = 0; i < argc; ++i) run.argv_words.push_back(argv[i]);

  std::string config_file;
  app.add_option("--config-file", config_file, "flat key=value settings file");
  app.add_flag("--dry-run", run.dry_run, "validate inputs and print, write nothing");
  auto* opt_mn = app.add_option("--mn", st.constants.m_n, "nucleon mass [MeV]");
  auto* opt_hbarc = app.add_option("--hbarc", st.constants.hbar_c, "hbar*c [MeV fm]");
  auto* opt_gmin = app.add_option("--grid-min", st.policy.grid_min, "grid start [fm]");
  auto* opt_gmax = app.add_option("--grid-max", st.policy.grid_max, "grid end [fm]");
  auto* opt_gstep = app.add_option("--grid-step", st.policy.grid_step, "grid step [fm]");

  // fit ----------------------------------------------------------------
  auto* cmd_fit = app.add_subcommand("fit", "fit pole positions to a phase-shift table");
  std::string fit_data, fit_out = "poles.json", fit_report = "fit_report.json";
  int fit_n = 3, fit_scan = 0;
  cmd_fit->add_option("--data", fit_data, "dataset CSV/TSV")->required();
  cmd_fit->add_option("--n", fit_n, "number of pole pairs");
  cmd_fit->add_option("--scan", fit_scan, "scan n = 1..N_MAX and report rss");
  cmd_fit->add_option("--out", fit_out, "poles output path");
  cmd_fit->add_option("--report", fit_report, "fit report path");

  // build --------------------------------------------------------------
  auto* cmd_build = app.add_subcommand("build", "construct a potential table from a chain");
  std::string build_poles, build_chain, build_config = "shallow", build_out = "potential.tsv";
  std::string build_units = "fm^-2";
  cmd_build->add_option("--poles", build_poles, "poles.json");
  cmd_build->add_option("--chain", build_chain, "explicit chain.json");
  cmd_build->add_option("--config", build_config,
                        "shallow | deep:A3=<v> | v8:kappa=<v>,c=<v>");
  cmd_build->add_option("--units", build_units, "fm^-2 (default) or MeV for an extra column");
  cmd_build->add_option("--out", build_out, "potential table path");

  // phases ---------------------------------------------------------------
  auto* cmd_phases = app.add_subcommand("phases", "tabulate the analytic phase shift");
  std::string ph_poles, ph_energies = "1:350:1", ph_out = "phases.tsv";
  cmd_phases->add_option("--poles", ph_poles, "poles.json")->required();
  cmd_phases->add_option("--energies", ph_energies, "E_lab grid LO:HI:STEP [MeV]");
  cmd_phases->add_option("--out", ph_out, "phase table path");

  // observables ------------------------------------------------------------
  auto* cmd_obs = app.add_subcommand("observables", "scattering length, effective range, Levinson");
  std::string obs_poles, obs_out = "observables.json";
  cmd_obs->add_option("--poles", obs_poles, "poles.json")->required();
  cmd_obs->add_option("--out", obs_out, "report path");

  // verify -----------------------------------------------------------------
  auto* cmd_verify = app.add_subcommand("verify", "ODE cross-check of phases and bound states");
  std::string vf_poles, vf_energies = "1:350:25", vf_out = "verify_report.json", vf_v8;
  bool vf_all = false;
  double vf_threshold = 0.2;
  cmd_verify->add_option("--poles", vf_poles, "poles.json")->required();
  cmd_verify->add_flag("--all-configs", vf_all, "include every enumerated configuration");
  cmd_verify->add_option("--v8", vf_v8, "also verify a paired chain: kappa=<v>,c=<v>");
  cmd_verify->add_option("--energies", vf_energies, "E_lab grid LO:HI:STEP [MeV]");
  cmd_verify->add_option("--threshold", vf_threshold, "max phase deviation [deg]");
  cmd_verify->add_option("--out", vf_out, "report path");

  // compare ------------------------------------------------------------------
  auto* cmd_compare = app.add_subcommand("compare", "aligned potential columns for plotting");
  std::string cp_poles, cp_against = "both", cp_range = "0.1:10:0.01", cp_out = "compare.tsv";
  std::string cp_v8 = "kappa=-3.7944,c=-0.155";
  cmd_compare->add_option("--poles", cp_poles, "poles.json")->required();
  cmd_compare->add_option("--against", cp_against, "reid68 | kukulin | both");
  cmd_compare->add_option("--range", cp_range, "x grid LO:HI[:STEP] [fm]");
  cmd_compare->add_option("--v8", cp_v8, "pair parameters for the V8 column");
  cmd_compare->add_option("--out", cp_out, "table path");

  CLI11_PARSE(app, argc, argv);

  try {
    // file config fills anything the flags left untouched
    const auto kv = load_flat_config(config_file);
    auto absorb = [&](const char* key, CLI::Option* opt, double& slot) {
      if (kv.count(key) && opt->count() == 0) slot = std::stod(kv.at(key));
    };
    absorb("mn", opt_mn, st.constants.m_n);
    absorb("hbarc", opt_hbarc, st.constants.hbar_c);
    absorb("grid_min", opt_gmin, st.policy.grid_min);
    absorb("grid_max", opt_gmax, st.policy.grid_max);
    absorb("grid_step", opt_gstep, st.policy.grid_step);
    st.constants.check();
    st.policy.check();
    run.config_snapshot = st.snapshot();

    // ------------------------------------------------------------- fit
    if (cmd_fit->parsed()) {
      run.note_input(fit_data);
      const auto data = PhaseShiftDataset::load(fit_data);
      FitOptions opts;
      opts.constants = st.constants;
      if (fit_scan > 0) {
        const auto scan = model_scan(data, fit_scan, opts);
        json rows = json::array();
        std::printf("# n  rss_deg2  converged\n");
        for (const auto& r : scan) {
          std::printf("%3d  %-12.6g  %s\n", r.n, r.rss, r.converged ? "yes" : "no");
          json jr;
          jr["n"] = r.n;
          jr["rss_deg2"] = r.rss;
          jr["converged"] = r.converged;
          jr["poles"] = {{"a", r.poles.a}, {"b", r.poles.b}};
          rows.push_back(jr);
        }
        json rep;
        rep["scan"] = rows;
        run.write_text(fit_report, rep.dump(2) + "\n");
        run.finish();
        return 0;
      }
      const auto result = fit_poles(data, fit_n, opts);
      json rep;
      rep["n"] = result.n;
      rep["rss_deg2"] = result.rss;
      rep["iterations"] = result.iterations;
      rep["converged"] = result.converged;
      rep["starts_tried"] = result.starts_tried;
      rep["residuals_deg"] = result.residuals;
      rep["poles"] = {{"a", result.poles.a}, {"b", result.poles.b}};
      if (result.n > 0) rep["observables"] = observables_json(result.poles);
      run.write_text(fit_out, to_json_string(result.poles));
      run.write_text(fit_report, rep.dump(2) + "\n");
      run.finish();
      std::printf("rss = %.6g deg^2 over %zu points (%d starts)\n", result.rss,
                  data.rows.size(), result.starts_tried);
      if (!result.converged) throw NumericalError("fit did not converge; best attempt written");
      return 0;
    }

    // ------------------------------------------------------------ build
    if (cmd_build->parsed()) {
      ChainSpec chain;
      if (!build_chain.empty()) {
        run.note_input(build_chain);
        chain = load_chain(build_chain);
      } else {
        if (build_poles.empty()) throw ValidationError("build: need --chain or --poles");
        run.note_input(build_poles);
        chain = chain_from_shorthand(load_pole_set(build_poles), build_config);
      }
      const auto rep = validate(chain);
      if (!rep.ok) {
        for (const auto& v : rep.violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
        throw ValidationError("chain failed validation");
      }
      const auto table = build_potential(chain, st.policy);
      const bool mev = build_units == "MeV" || build_units == "mev";
      std::ostringstream out;
      out << (mev ? "# x_fm V_fm^-2 V_MeV\n" : "# x_fm V_fm^-2\n");
      for (std::size_t i = 0; i < table.x.size(); ++i) {
        out << fmt12(table.x[i]) << "\t" << fmt12(table.v[i]);
        if (mev) out << "\t" << fmt12(potential_mev_from_wavenumber_units(table.v[i], st.constants));
        out << "\n";
      }
      run.write_text(build_out, out.str());
      run.finish();
      std::printf("nu = %d, bound states = %zu, %zu grid points\n", table.nu,
                  table.bound_states.size(), table.x.size());
      return 0;
    }

    // ----------------------------------------------------------- phases
    if (cmd_phases->parsed()) {
      run.note_input(ph_poles);
      const auto poles = load_pole_set(ph_poles);
      poles.check();
      std::ostringstream out;
      out << "# E_lab_MeV k_fm^-1 delta_deg\n";
      for (double e : parse_range(ph_energies, 1.0)) {
        const double k = k_from_elab(e, st.constants).k;
        out << fmt12(e) << "\t" << fmt12(k) << "\t" << fmt12(phase_shift(poles, k) * kRadToDeg)
            << "\n";
      }
      run.write_text(ph_out, out.str());
      run.finish();
      return 0;
    }

    // ------------------------------------------------------ observables
    if (cmd_obs->parsed()) {
      run.note_input(obs_poles);
      const auto poles = load_pole_set(obs_poles);
      poles.check();
      json rep;
      rep["observables"] = observables_json(poles);
      json lev = json::array();
      for (const auto& cfg : enumerate_configurations(poles)) {
        const auto lr = levinson_check(cfg.chain);
        json j;
        j["kind"] = to_string(cfg.kind);
        j["nu"] = lr.nu;
        j["n_bound"] = lr.n_bound;
        j["delta_drop_rad"] = lr.delta_drop;
        j["ledger_rad"] = lr.ledger;
        j["pass"] = lr.pass;
        lev.push_back(j);
      }
      rep["levinson"] = lev;
      run.write_text(obs_out, rep.dump(2) + "\n");
      run.finish();
      const auto obs = observables(poles);
      std::printf("a = %.6g fm, r0 = %.6g fm\n", obs.scattering_length, obs.effective_range);
      return 0;
    }

    // ----------------------------------------------------------- verify
    if (cmd_verify->parsed()) {
      run.note_input(vf_poles);
      const auto poles = load_pole_set(vf_poles);
      std::vector<ChainSpec> chains;
      std::vector<std::string> names;
      if (vf_all) {
        for (const auto& cfg : enumerate_configurations(poles)) {
          chains.push_back(cfg.chain);
          names.push_back(to_string(cfg.kind));
        }
      } else {
        chains.push_back(chain_from_shorthand(poles, "shallow"));
        names.push_back("shallow");
      }
      if (!vf_v8.empty()) {
        chains.push_back(chain_from_shorthand(poles, "v8:" + vf_v8));
        names.push_back("v8");
      }
      const auto energies = parse_range(vf_energies, 25.0);
      const auto rep =
          verify_phase_equivalence(chains, energies, vf_threshold, st.constants, st.policy);

      json jr;
      jr["energies_mev"] = rep.energies_mev;
      jr["analytic_deg"] = rep.analytic_deg;
      jr["threshold_deg"] = rep.threshold_deg;
      jr["max_deviation_deg"] = rep.max_deviation_deg;
      jr["pass"] = rep.pass;
      json per = json::array();
      bool bound_ok = true;
      for (std::size_t i = 0; i < chains.size(); ++i) {
        json jc;
        jc["name"] = names[i];
        jc["label"] = rep.chain_labels[i];
        jc["phases_deg"] = rep.phases_deg[i];
        ChainPotential pot(chains[i], st.policy);
        auto cfg = SolverConfig::from_policy(st.policy, pot.nu());
        RadialSolver solver([&pot](double x) { return pot(x); }, cfg);
        const auto found = solver.bound_states(-40.0, 0.0);
        jc["bound_states_found_fm2"] = found;
        jc["bound_states_ledger_fm2"] = pot.bound_states();
        bool ok = found.size() == pot.bound_states().size();
        for (std::size_t l = 0; ok && l < found.size(); ++l)
          ok = std::abs(found[l] - pot.bound_states()[l]) <
               1e-3 * std::abs(pot.bound_states()[l]);
        jc["bound_states_pass"] = ok;
        bound_ok = bound_ok && ok;
        per.push_back(jc);
      }
      jr["chains"] = per;
      jr["bound_states_pass"] = bound_ok;
      run.write_text(vf_out, jr.dump(2) + "\n");
      run.finish();
      std::printf("max phase deviation %.4g deg (threshold %.3g), bound states %s\n",
                  rep.max_deviation_deg, rep.threshold_deg, bound_ok ? "ok" : "MISMATCH");
      if (!rep.pass || !bound_ok) throw VerificationError("phase-equivalence check failed");
      return 0;
    }

    // ---------------------------------------------------------- compare
    if (cmd_compare->parsed()) {
      run.note_input(cp_poles);
      const auto poles = load_pole_set(cp_poles);
      ChainPotential v6(chain_from_shorthand(poles, "shallow"), st.policy);
      ChainPotential v8(chain_from_shorthand(poles, "v8:" + cp_v8), st.policy);
      const bool reid = cp_against == "reid68" || cp_against == "both";
      const bool kuk = cp_against == "kukulin" || cp_against == "both";
      if (!reid && !kuk) throw std::invalid_argument("--against must be reid68, kukulin or both");

      std::ostringstream out;
      out << "# x_fm V6_MeV V8_MeV";
      if (reid) out << " Reid68_MeV";
      if (kuk) out << " Kukulin_MeV";
      out << " log_abs_V6 log_abs_V8";
      if (reid) out << " log_abs_Reid68";
      if (kuk) out << " log_abs_Kukulin";
      out << "\n";

      double max_dev_reid = 0.0, depth = 0.0;
      for (double x : parse_range(cp_range, 0.01)) {
        if (!(x > 0.0)) continue;
        const double v6x = potential_mev_from_wavenumber_units(v6(x), st.constants);
        const double v8x = potential_mev_from_wavenumber_units(v8(x), st.constants);
        out << fmt12(x) << "\t" << fmt12(v6x) << "\t" << fmt12(v8x);
        double rx = 0.0, kx = 0.0;
        if (reid) {
          rx = reference_reid68(x);
          out << "\t" << fmt12(rx);
        }
        if (kuk) {
          kx = reference_kukulin(x);
          out << "\t" << fmt12(kx);
        }
        out << "\t" << fmt12(std::log(std::abs(v6x) + 1e-300))
            << "\t" << fmt12(std::log(std::abs(v8x) + 1e-300));
        if (reid) out << "\t" << fmt12(std::log(std::abs(rx) + 1e-300));
        if (kuk) out << "\t" << fmt12(std::log(std::abs(kx) + 1e-300));
        out << "\n";
        depth = std::min(depth, v6x);
        if (reid && x >= 1.0) max_dev_reid = std::max(max_dev_reid, std::abs(v6x - rx));
      }
      run.write_text(cp_out, out.str());
      run.finish();
      if (reid)
        std::printf("max |V6 - Reid68| for x >= 1 fm: %.4g MeV (V6 depth %.4g MeV)\n",
                    max_dev_reid, depth);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
