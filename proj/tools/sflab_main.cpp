#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sflab/harness.hpp"

using nlohmann::json;

namespace {

struct CliState {
  sflab::VerifyOptions opt;
  std::string config_path;
  std::string ledger_path = "sflab_ledger.json";
  std::string scenario;  // registry name, or kind resolved with m/degree/rank
  int m = 1;
  int degree = 1;
  std::size_t rank = 1;
  bool json_output = false;
};

// config fills in whatever was not given explicitly on the command line
void apply_config(CliState& st, const CLI::App& app) {
  if (st.config_path.empty()) return;
  std::ifstream in(st.config_path);
  if (!in) throw CLI::ValidationError("config", "cannot open " + st.config_path);
  json cfg = json::parse(in);
  auto wants = [&](const char* key, const char* flag) {
    return cfg.contains(key) && app.count(flag) == 0;
  };
  if (wants("scenario", "--scenario"))
    st.scenario = cfg["scenario"].get<std::string>();
  if (wants("m", "--m")) st.m = cfg["m"].get<int>();
  if (wants("degree", "--degree")) st.degree = cfg["degree"].get<int>();
  if (wants("rank", "--rank")) st.rank = cfg["rank"].get<std::size_t>();
  if (wants("radius", "--radius")) st.opt.radius = cfg["radius"].get<double>();
  if (wants("nodes", "--nodes")) st.opt.nodes = cfg["nodes"].get<std::size_t>();
  if (wants("cutoff", "--cutoff")) st.opt.cutoff = cfg["cutoff"].get<int>();
  if (wants("s_samples", "--s-samples"))
    st.opt.s_samples = cfg["s_samples"].get<std::size_t>();
  if (wants("flow_window", "--flow-window"))
    st.opt.flow_window = cfg["flow_window"].get<double>();
  if (wants("xi_window", "--xi-window"))
    st.opt.xi_window = cfg["xi_window"].get<double>();
  if (wants("tolerance", "--tolerance"))
    st.opt.tolerance = cfg["tolerance"].get<double>();
  if (cfg.contains("zero_snap"))
    st.opt.flow.zero_snap = cfg["zero_snap"].get<double>();
  if (cfg.contains("flow_samples"))
    st.opt.flow.samples_per_interval = cfg["flow_samples"].get<std::size_t>();
}

std::string signed_suffix(int v) {
  return (v < 0 ? "" : "+") + std::to_string(v);
}

sflab::Scenario resolve_scenario(const CliState& st) {
  const std::string& name = st.scenario;
  if (name == "winding" || name.empty()) {
    const int m = st.m;
    if (st.rank > 1) {
      std::vector<int> ms(st.rank, 0);
      ms[0] = m;
      return {"winding-diag" + signed_suffix(m),
              [ms](std::size_t n, double r) {
                return sflab::winding_family_diag(ms, n, 0.0, 1.0, r);
              },
              0.0, long(-m), double(-m), 0.0};
    }
    return {"winding" + signed_suffix(m),
            [m](std::size_t n, double r) {
              return sflab::winding_family(m, n, 0.0, 1.0, r);
            },
            0.0, long(-m), double(-m), 0.0};
  }
  if (name == "hypersurface") {
    const int dg = st.degree;
    return {"hypersurface" + signed_suffix(dg),
            [dg](std::size_t n, double r) {
              return sflab::hypersurface_family(dg, n, 0.0, 1.0, r);
            },
            0.5, long(dg), double(dg), 0.0};
  }
  return sflab::find_scenario(sflab::standard_scenarios(), name);
}

sflab::Conventions load_or_calibrate(CliState& st, bool quiet) {
  sflab::Conventions conv;
  std::ifstream in(st.ledger_path);
  if (in) {
    json j = json::parse(in);
    conv.sigma = j.value("sigma", -1);
    conv.spin_trivial = j.value("spin_trivial", 0.0);
    conv.spin_bounding = j.value("spin_bounding", 0.5);
    conv.calibrated = j.value("calibrated", false);
    if (conv.calibrated) return conv;
  }
  const auto cal = sflab::calibrate(st.opt.nodes, st.opt.cutoff, st.opt.s_samples);
  conv.sigma = cal.sigma;
  conv.calibrated = true;
  json j{{"sigma", conv.sigma},
         {"calibrated", true},
         {"spin_trivial", conv.spin_trivial},
         {"spin_bounding", conv.spin_bounding},
         {"clifford", "sigma * (-i) (d/dtheta + twist)"}};
  std::ofstream out(st.ledger_path);
  out << j.dump(2) << "\n";
  if (!quiet)
    std::cerr << "calibrated sigma = " << conv.sigma << " (ledger "
              << st.ledger_path << ")\n";
  return conv;
}

json report_to_json(const sflab::VerificationReport& r) {
  return json{{"scenario", r.scenario},
              {"flow", r.flow},
              {"geometric", r.geometric},
              {"delta_xi", r.delta_xi},
              {"delta_xi_method", r.delta_xi_method},
              {"residual", r.residual},
              {"imag_residue", r.imag_residue},
              {"verified", r.verified},
              {"elapsed_seconds", r.elapsed_seconds},
              {"flow_leaves", r.flow_leaves},
              {"spectra_evaluated", r.spectra_evaluated},
              {"note", r.note}};
}

int cmd_calibrate(CliState& st) {
  const auto cal = sflab::calibrate(st.opt.nodes, st.opt.cutoff, st.opt.s_samples);
  json j{{"sigma", cal.sigma},
         {"calibrated", true},
         {"spin_trivial", 0.0},
         {"spin_bounding", 0.5},
         {"clifford", "sigma * (-i) (d/dtheta + twist)"}};
  std::ofstream out(st.ledger_path);
  out << j.dump(2) << "\n";
  if (st.json_output) {
    json r{{"sigma", cal.sigma},
           {"flow_sigma_minus", cal.flow_minus},
           {"flow_sigma_plus", cal.flow_plus},
           {"geometric", cal.geometric},
           {"decisive", cal.decisive},
           {"ledger", st.ledger_path}};
    std::cout << r.dump(2) << "\n";
  } else {
    std::cout << "geometric side (unit winding): " << cal.geometric << "\n"
              << "flow with sigma=-1: " << cal.flow_minus
              << ", sigma=+1: " << cal.flow_plus << "\n"
              << "selected sigma = " << cal.sigma << " -> " << st.ledger_path
              << "\n";
  }
  return 0;
}

int cmd_verify(CliState& st) {
  const auto conv = load_or_calibrate(st, st.json_output);
  std::vector<sflab::Scenario> list;
  if (st.scenario.empty() || st.scenario == "all") {
    list = sflab::standard_scenarios();
  } else {
    list.push_back(resolve_scenario(st));
  }
  bool all_ok = true;
  json arr = json::array();
  for (const auto& sc : list) {
    const auto rep = sflab::verify_scenario(sc, conv, st.opt);
    all_ok = all_ok && rep.verified;
    if (st.json_output) {
      arr.push_back(report_to_json(rep));
    } else {
      std::printf(
          "%-16s flow=%+ld  geometric=%+.9f  dxi=%+.6f [%s]  residual=%.3e  "
          "%s (%.2fs)\n",
          rep.scenario.c_str(), rep.flow, rep.geometric, rep.delta_xi,
          rep.delta_xi_method.c_str(), rep.residual,
          rep.verified ? "ok" : "FAIL", rep.elapsed_seconds);
      if (!rep.note.empty()) std::printf("    note: %s\n", rep.note.c_str());
    }
  }
  if (st.json_output) std::cout << arr.dump(2) << "\n";
  return all_ok ? 0 : 1;
}

int cmd_flow(CliState& st) {
  const auto conv = load_or_calibrate(st, st.json_output);
  const auto sc = resolve_scenario(st);
  auto fam = sc.build(st.opt.nodes, st.opt.radius);
  sflab::CircleDiracFamily dirac(fam, st.opt.cutoff, sc.spin_offset, conv.sigma);
  const double nu = 2.0 * sflab::pi_val / fam.chart().axis(0).length();
  const double flow_w =
      std::min(st.opt.flow_window * nu, 0.9 * dirac.trust_half_width());
  const auto fr = sflab::spectral_flow(dirac.windowed(flow_w), fam.s_begin(),
                                       fam.s_end(), st.opt.flow);
  if (st.json_output) {
    json leaves = json::array();
    for (const auto& l : fr.leaves)
      leaves.push_back(json{{"s_lo", l.s_lo},
                            {"s_hi", l.s_hi},
                            {"level", l.level},
                            {"clearance", l.clearance},
                            {"margin", l.margin},
                            {"count_lo", l.count_lo},
                            {"count_hi", l.count_hi}});
    json r{{"scenario", sc.name},
           {"flow", fr.flow},
           {"leaves", leaves},
           {"spectra_evaluated", fr.spectra_evaluated}};
    std::cout << r.dump(2) << "\n";
  } else {
    std::printf("%s: flow = %+ld over [%g, %g] (%zu certified leaves, %zu "
                "spectra)\n",
                sc.name.c_str(), fr.flow, fam.s_begin(), fam.s_end(),
                fr.leaves.size(), fr.spectra_evaluated);
    for (const auto& l : fr.leaves)
      std::printf("  [%.6f, %.6f] level=%.6f clearance=%.3e margin=%.3e "
                  "counts %ld -> %ld\n",
                  l.s_lo, l.s_hi, l.level, l.clearance, l.margin, l.count_lo,
                  l.count_hi);
  }
  return 0;
}

int cmd_spectrum(CliState& st, std::size_t samples, const std::string& csv) {
  const auto conv = load_or_calibrate(st, st.json_output || !csv.empty());
  const auto sc = resolve_scenario(st);
  auto fam = sc.build(st.opt.nodes, st.opt.radius);
  sflab::CircleDiracFamily dirac(fam, st.opt.cutoff, sc.spin_offset, conv.sigma);
  const double nu = 2.0 * sflab::pi_val / fam.chart().axis(0).length();
  const double window =
      std::min(st.opt.flow_window * nu, 0.9 * dirac.trust_half_width());

  std::vector<std::pair<double, std::vector<double>>> rows;
  std::size_t min_count = SIZE_MAX;
  for (std::size_t j = 0; j < samples; ++j) {
    const double s = fam.s_begin() + (fam.s_end() - fam.s_begin()) *
                                         double(j) / double(samples - 1);
    auto vals = dirac.window(s, window).values;
    min_count = std::min(min_count, vals.size());
    rows.emplace_back(s, std::move(vals));
  }
  // trim every row to the same column count, keeping values closest to zero
  for (auto& [s, vals] : rows) {
    std::sort(vals.begin(), vals.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    vals.resize(min_count);
    std::sort(vals.begin(), vals.end());
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!csv.empty()) {
    file.open(csv);
    if (!file) throw std::runtime_error("cannot write " + csv);
    os = &file;
  }
  *os << "s";
  for (std::size_t c = 1; c <= min_count; ++c) *os << ",lambda_" << c;
  *os << "\n";
  os->precision(12);
  for (const auto& [s, vals] : rows) {
    *os << s;
    for (double v : vals) *os << "," << v;
    *os << "\n";
  }
  if (!csv.empty())
    std::cerr << "wrote " << rows.size() << " rows x " << min_count
              << " eigenvalue columns to " << csv << "\n";
  return 0;
}

int cmd_csform(CliState& st) {
  const auto sc = resolve_scenario(st);
  auto fam = sc.build(st.opt.nodes, st.opt.radius);
  const auto gs = sflab::geometric_side(fam, st.opt.s_samples);
  json r{{"scenario", sc.name},
         {"geometric", gs.value},
         {"imag_residue", gs.imag_residue},
         {"s_samples", st.opt.s_samples}};
  // straight-line families from the trivial connection admit a closed form
  if (fam.omega_form(fam.s_begin()).norm_inf() < 1e-12) {
    const auto closed = sflab::integrate_top(
        sflab::flat_line_odd_form(fam.omega_form(fam.s_end())));
    r["closed_form"] = -closed.value.real();
    r["quadrature_vs_closed"] = std::abs(-closed.value.real() - gs.value);
  }
  if (st.json_output) {
    std::cout << r.dump(2) << "\n";
  } else {
    std::cout << sc.name << ": geometric side = " << gs.value
              << " (imag residue " << gs.imag_residue << ")\n";
    if (r.contains("closed_form"))
      std::cout << "  closed form = " << r["closed_form"].get<double>()
                << ", |difference| = "
                << r["quadrature_vs_closed"].get<double>() << "\n";
  }
  return 0;
}

int cmd_xi(CliState& st, const std::string& endpoint) {
  const auto conv = load_or_calibrate(st, st.json_output);
  const auto sc = resolve_scenario(st);
  auto fam = sc.build(st.opt.nodes, st.opt.radius);
  sflab::CircleDiracFamily dirac(fam, st.opt.cutoff, sc.spin_offset, conv.sigma);
  const double nu = 2.0 * sflab::pi_val / fam.chart().axis(0).length();
  const double s = endpoint == "b" ? fam.s_end() : fam.s_begin();
  const double xi_w =
      std::min(st.opt.xi_window * nu, 0.9 * dirac.trust_half_width());
  auto vals = dirac.window(s, xi_w).values;
  for (auto& v : vals) v /= nu;

  json r{{"scenario", sc.name}, {"endpoint", endpoint}, {"s", s}};
  if (const auto lad = sflab::detect_affine_ladder(vals)) {
    const auto x = sflab::xi_affine(lad->offset, lad->mult);
    r["method"] = "affine";
    r["offset"] = lad->offset;
    r["multiplicity"] = lad->mult;
    r["eta"] = x.eta;
    r["h"] = x.h;
    r["xi"] = x.xi;
  } else {
    const auto x = sflab::xi_truncated(vals, xi_w / nu);
    r["method"] = "ladder-completion";
    r["eta"] = x.eta;
    r["h"] = x.h;
    r["xi"] = x.xi;
    r["error_bound"] = x.error_bound;
  }
  if (st.json_output) {
    std::cout << r.dump(2) << "\n";
  } else {
    std::cout << sc.name << " at s=" << s << " (" << r["method"].get<std::string>()
              << "): eta=" << r["eta"].get<double>() << " h="
              << r["h"].get<double>() << " xi=" << r["xi"].get<double>() << "\n";
  }
  return 0;
}

int cmd_aps(CliState& st, double slope, int k_range, std::uint32_t seed,
            bool lattice) {
  std::vector<double> offsets(std::size_t(2 * k_range + 1), 0.0);
  if (!lattice) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-0.45, 0.45);
    for (auto& d : offsets) d = dist(rng);
  }
  const auto fam = sflab::make_affine_family(slope, offsets, k_range);
  const auto counts = sflab::aps_index(fam.branches, 0.0, 1.0);
  const long flow = sflab::crossing_flow(fam.branches, 0.0, 1.0);
  const bool id1 = counts.ind_relaxed == counts.ind_aps + counts.h_b;
  const bool id2 = flow == counts.ind_relaxed;
  json r{{"slope", slope},
         {"k_range", k_range},
         {"lattice", lattice},
         {"ind_aps", counts.ind_aps},
         {"ind_relaxed", counts.ind_relaxed},
         {"h_a", counts.h_a},
         {"h_b", counts.h_b},
         {"kernel", counts.kernel},
         {"cokernel", counts.cokernel},
         {"flow", flow},
         {"relaxed_equals_aps_plus_hb", id1},
         {"flow_equals_relaxed", id2}};
  if (st.json_output) {
    std::cout << r.dump(2) << "\n";
  } else {
    std::printf("slope=%+.4f: ind_aps=%+ld ind_relaxed=%+ld h_a=%ld h_b=%ld "
                "flow=%+ld  identities %s\n",
                slope, counts.ind_aps, counts.ind_relaxed, counts.h_a,
                counts.h_b, flow, (id1 && id2) ? "ok" : "VIOLATED");
  }
  return (id1 && id2) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-flow verification lab"};
  app.require_subcommand(1);
  app.fallthrough();  // shared options may appear after the subcommand
  CliState st;

  app.add_option("--config", st.config_path, "JSON config file");
  app.add_option("--ledger", st.ledger_path, "convention ledger path");
  app.add_flag("--json", st.json_output, "machine-readable output");
  app.add_option("--nodes", st.opt.nodes, "grid nodes on the circle");
  app.add_option("--cutoff", st.opt.cutoff, "Fourier mode cutoff K");
  app.add_option("--s-samples", st.opt.s_samples, "quadrature samples in s");
  app.add_option("--radius", st.opt.radius, "circle radius");
  app.add_option("--scenario", st.scenario,
                 "scenario name (winding, hypersurface, winding-half, ... or "
                 "registry name like winding+2)");
  app.add_option("-m,--m", st.m, "winding number");
  app.add_option("--degree", st.degree, "hypersurface map degree");
  app.add_option("--rank", st.rank, "bundle rank for diagonal scenarios");
  app.add_option("--flow-window", st.opt.flow_window,
                 "flow eigenvalue window (ladder units)");
  app.add_option("--xi-window", st.opt.xi_window,
                 "xi eigenvalue window (ladder units)");
  app.add_option("--tolerance", st.opt.tolerance, "verification tolerance");

  auto* c_cal = app.add_subcommand("calibrate", "fix the global sign");
  auto* c_ver = app.add_subcommand("verify", "check flow = geometric + dxi");
  auto* c_flow = app.add_subcommand("flow", "certified spectral flow");
  auto* c_spec = app.add_subcommand("spectrum", "eigencurve table");
  std::size_t spec_samples = 65;
  std::string spec_csv;
  c_spec->add_option("--samples", spec_samples, "parameter samples");
  c_spec->add_option("--csv", spec_csv, "CSV output path (default stdout)");
  auto* c_cs = app.add_subcommand("csform", "geometric side of a scenario");
  auto* c_xi = app.add_subcommand("xi", "boundary invariant at an endpoint");
  std::string endpoint = "b";
  c_xi->add_option("--endpoint", endpoint, "a or b")
      ->check(CLI::IsMember({"a", "b"}));
  auto* c_aps = app.add_subcommand("aps", "cylinder index bookkeeping");
  double aps_slope = 1.5;
  int aps_range = 14;
  std::uint32_t aps_seed = 7;
  bool aps_lattice = false;
  c_aps->add_option("--slope", aps_slope, "eigenvalue branch slope");
  c_aps->add_option("--k-range", aps_range, "branch index range");
  c_aps->add_option("--seed", aps_seed, "offset seed");
  c_aps->add_flag("--lattice", aps_lattice, "integer branches, no offsets");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config(st, app);
    if (c_cal->parsed()) return cmd_calibrate(st);
    if (c_ver->parsed()) return cmd_verify(st);
    if (c_flow->parsed()) return cmd_flow(st);
    if (c_spec->parsed()) return cmd_spectrum(st, spec_samples, spec_csv);
    if (c_cs->parsed()) return cmd_csform(st);
    if (c_xi->parsed()) return cmd_xi(st, endpoint);
    if (c_aps->parsed())
      return cmd_aps(st, aps_slope, aps_range, aps_seed, aps_lattice);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
