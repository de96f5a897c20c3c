// sqrtpot: spectrum / phase-shift / wavefunction / validation runs for the
// attractive -alpha/sqrt(r) radial problem, emitting CSV or JSON tables
// with an embedded run manifest.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqrtpot/oracle.hpp"
#include "sqrtpot/spectra.hpp"
#include "sqrtpot/validate.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

// All numbers are serialized with 17 significant digits so every double
// round-trips exactly and re-runs are byte-identical.
std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_int(long x) { return std::to_string(x); }

struct Manifest {
  std::string command;
  // Values are pre-serialized JSON literals (quoted strings, bare numbers).
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> tolerances;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // pre-serialized numbers
};

void write_output(const std::string& path, const std::string& format,
                  const Manifest& m, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sqrtpot::NumericError("cannot open output file: " + path);
  if (format == "csv") {
    out << "# command: " << m.command << "\n";
    out << "# tool_version: " << kToolVersion << "\n";
    for (const auto& [k, v] : m.inputs) out << "# " << k << ": " << v << "\n";
    for (const auto& [k, v] : m.tolerances) {
      out << "# tolerance." << k << ": " << v << "\n";
    }
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      out << (i ? "," : "") << t.header[i];
    }
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << (i ? "," : "") << row[i];
      }
      out << "\n";
    }
  } else {  // json
    auto obj = [&out](const std::vector<std::pair<std::string, std::string>>&
                          kv) {
      out << "{";
      for (std::size_t i = 0; i < kv.size(); ++i) {
        out << (i ? "," : "") << "\"" << kv[i].first << "\":" << kv[i].second;
      }
      out << "}";
    };
    out << "{\"manifest\":{\"command\":\"" << m.command
        << "\",\"tool_version\":\"" << kToolVersion << "\",\"inputs\":";
    obj(m.inputs);
    out << ",\"tolerances\":";
    obj(m.tolerances);
    out << "},\"rows\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out << (r ? "," : "") << "{";
      for (std::size_t i = 0; i < t.header.size(); ++i) {
        out << (i ? "," : "") << "\"" << t.header[i]
            << "\":" << t.rows[r][i];
      }
      out << "}";
    }
    out << "]}\n";
  }
  if (!out.good()) {
    throw sqrtpot::NumericError("write failure on output file: " + path);
  }
}

// Integer power (-2ik)^(l+1), kept as repeated multiplication so the
// identity (-2ikr)^(l+1) = (-2ik)^(l+1) r^(l+1) holds exactly.
sqrtpot::Complex neg2ik_pow(double k, int l) {
  const sqrtpot::Complex base(0.0, -2.0 * k);
  sqrtpot::Complex p(1.0, 0.0);
  for (int i = 0; i <= l; ++i) p *= base;
  return p;
}

int run_spectrum(double alpha, int l, double kmin, double kmax, int max_levels,
                 const std::string& out, const std::string& format) {
  const auto spec = sqrtpot::bound_spectrum(alpha, l, {kmin, kmax}, max_levels);
  Manifest m;
  m.command = "spectrum";
  m.inputs = {{"alpha", fmt17(alpha)},       {"l", fmt_int(l)},
              {"kappa_min", fmt17(kmin)},    {"kappa_max", fmt17(kmax)},
              {"max_levels", fmt_int(max_levels)}, {"format", "\"" + format + "\""}};
  m.tolerances = {{"root_rel", fmt17(1e-13)}, {"series", fmt17(1e-9)}};
  Table t;
  t.header = {"n", "kappa", "energy", "residual"};
  for (const auto& e : spec) {
    t.rows.push_back({fmt_int(e.n), fmt17(e.kappa), fmt17(e.energy),
                      fmt17(e.residual)});
  }
  write_output(out, format, m, t);
  return 0;
}

int run_phaseshift(double alpha, int l, double kmin, double kmax, int ksteps,
                   const std::string& out, const std::string& format) {
  if (!(kmin > 0.0) || !(kmax >= kmin)) {
    throw sqrtpot::NumericError("phaseshift: need 0 < k-min <= k-max");
  }
  std::vector<double> grid;
  for (int i = 0; i < ksteps; ++i) {
    grid.push_back(ksteps == 1
                       ? kmin
                       : kmin + (kmax - kmin) * double(i) / (ksteps - 1));
  }
  const auto ps = sqrtpot::phase_shift(alpha, l, grid);
  Manifest m;
  m.command = "phaseshift";
  m.inputs = {{"alpha", fmt17(alpha)}, {"l", fmt_int(l)},
              {"k_min", fmt17(kmin)},  {"k_max", fmt17(kmax)},
              {"k_steps", fmt_int(ksteps)}, {"format", "\"" + format + "\""}};
  m.tolerances = {{"connection", fmt17(1e-9)},
                  {"unitarity_check", fmt17(1e-10)}};
  Table t;
  t.header = {"k", "delta", "re_s", "im_s"};
  for (const auto& p : ps) {
    t.rows.push_back({fmt17(p.k), fmt17(p.delta), fmt17(p.s_matrix.real()),
                      fmt17(p.s_matrix.imag())});
  }
  write_output(out, format, m, t);
  return 0;
}

int run_wavefunction(double alpha, int l, double k, int kappa_level,
                     double rmin, double rmax, int rsteps,
                     const std::string& out, const std::string& format) {
  if (!(rmin > 0.0) || !(rmax > rmin) || rsteps < 2) {
    throw sqrtpot::NumericError(
        "wavefunction: need 0 < r-min < r-max and r-steps >= 2");
  }
  Manifest m;
  m.command = "wavefunction";
  m.inputs = {{"alpha", fmt17(alpha)},  {"l", fmt_int(l)},
              {"r_min", fmt17(rmin)},   {"r_max", fmt17(rmax)},
              {"r_steps", fmt_int(rsteps)}, {"format", "\"" + format + "\""}};
  Table t;
  t.header = {"r", "re_u", "im_u"};
  auto r_at = [&](int i) {
    return rmin + (rmax - rmin) * double(i) / (rsteps - 1);
  };

  if (kappa_level > 0) {
    const double s = std::pow(std::max(alpha, 1e-12), 2.0 / 3.0);
    const auto spec =
        sqrtpot::bound_spectrum(alpha, l, {0.3 * s, 3.0 * s}, kappa_level);
    if (int(spec.size()) < kappa_level) {
      throw sqrtpot::NumericError(
          "wavefunction: bound level " + std::to_string(kappa_level) +
          " not found in the default search window");
    }
    const auto state =
        sqrtpot::make_bound_state(alpha, l, spec[kappa_level - 1]);
    m.inputs.push_back({"kappa_level", fmt_int(kappa_level)});
    m.inputs.push_back({"kappa", fmt17(state.entry.kappa)});
    m.inputs.push_back({"switch_radius", fmt17(state.r_switch)});
    m.tolerances = {{"glue_mismatch", fmt17(state.glue_mismatch)}};
    for (int i = 0; i < rsteps; ++i) {
      const double r = r_at(i);
      t.rows.push_back(
          {fmt17(r), fmt17(sqrtpot::bound_wavefunction(state, r)), fmt17(0.0)});
    }
  } else {
    // Scattering: regular series below the switch radius, connected
    // asymptotic form above. The switch radius is the log-midpoint of the
    // window where the two representations agree to 1e-7.
    sqrtpot::PhysicalConfig cfg{alpha, l, sqrtpot::Complex(k, 0.0)};
    const sqrtpot::Complex a_l = 1.0 / neg2ik_pow(k, l);
    double r_lo = -1.0, r_hi = -1.0;
    for (double z = 6.0; z <= 12.01; z += 0.5) {
      const double r = z * z / (2.0 * k);
      const sqrtpot::Complex ua = sqrtpot::regular_u(cfg, r, 1e-12).u;
      const sqrtpot::Complex ub =
          a_l * sqrtpot::scattering_wavefunction(alpha, l, k, r);
      const double rel = std::abs(ua - ub) /
                         std::max({std::abs(ua), std::abs(ub), 1e-300});
      if (rel <= 1e-7) {
        if (r_lo < 0.0) r_lo = r;
        r_hi = r;
      }
    }
    if (r_lo < 0.0) {
      throw sqrtpot::NumericError(
          "wavefunction: no overlap window where the series and asymptotic "
          "representations agree to 1e-7");
    }
    const double r_switch = std::sqrt(r_lo * r_hi);
    m.inputs.push_back({"k", fmt17(k)});
    m.inputs.push_back({"switch_radius", fmt17(r_switch)});
    m.tolerances = {{"overlap_agreement", fmt17(1e-7)}};
    for (int i = 0; i < rsteps; ++i) {
      const double r = r_at(i);
      const sqrtpot::Complex u =
          (r < r_switch)
              ? sqrtpot::regular_u(cfg, r, 1e-12).u
              : a_l * sqrtpot::scattering_wavefunction(alpha, l, k, r);
      t.rows.push_back({fmt17(r), fmt17(u.real()), fmt17(u.imag())});
    }
  }
  write_output(out, format, m, t);
  return 0;
}

int run_validate(const std::string& suite) {
  const auto results = sqrtpot::run_acceptance(
      suite == "fast" ? sqrtpot::Suite::kFast : sqrtpot::Suite::kFull);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": "
              << r.name << " — " << r.detail << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << " ("
            << results.size() << " run)\n";
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact radial solutions for V(r) = -alpha/sqrt(r)"};
  app.require_subcommand(1);

  double alpha = 1.0;
  int l = 0;
  std::string out_path, format = "csv", suite = "fast";

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--alpha", alpha, "coupling strength (>= 0)")->required();
    sub->add_option("--l", l, "orbital angular momentum (>= 0)")
        ->check(CLI::NonNegativeNumber);
    if (needs_out) {
      sub->add_option("--out", out_path, "output file path")->required();
      sub->add_option("--format", format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
    }
  };

  double kappa_min = 0.25, kappa_max = 2.0;
  int max_levels = 0;
  auto* sp = app.add_subcommand("spectrum", "bound-state levels from K2 zeros");
  add_common(sp, true);
  sp->add_option("--kappa-min", kappa_min, "lower binding-wavenumber bound");
  sp->add_option("--kappa-max", kappa_max, "upper binding-wavenumber bound");
  sp->add_option("--max-levels", max_levels, "0 = all levels in range");

  double k_min = 0.5, k_max = 2.0;
  int k_steps = 4;
  auto* ph = app.add_subcommand("phaseshift", "phase shifts and S-matrix");
  add_common(ph, true);
  ph->add_option("--k-min", k_min, "lowest wavenumber (> 0)")->required();
  ph->add_option("--k-max", k_max, "highest wavenumber")->required();
  ph->add_option("--k-steps", k_steps, "number of grid points")
      ->check(CLI::PositiveNumber);

  double wf_k = 0.0, r_min = 0.01, r_max = 30.0;
  int kappa_level = 0, r_steps = 1000;
  auto* wf = app.add_subcommand("wavefunction", "radial wavefunction table");
  add_common(wf, true);
  auto* optk = wf->add_option("--k", wf_k, "scattering wavenumber (> 0)");
  auto* optn =
      wf->add_option("--kappa-level", kappa_level, "bound level index (>= 1)");
  optk->excludes(optn);
  r_min = 0.01;
  wf->add_option("--r-min", r_min, "first radius (> 0)");
  wf->add_option("--r-max", r_max, "last radius");
  wf->add_option("--r-steps", r_steps, "number of radii (linear grid)");

  auto* va = app.add_subcommand("validate", "run the acceptance criteria");
  va->add_option("--suite", suite, "which battery to run")
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (sp->parsed()) {
      return run_spectrum(alpha, l, kappa_min, kappa_max, max_levels, out_path,
                          format);
    }
    if (ph->parsed()) {
      return run_phaseshift(alpha, l, k_min, k_max, k_steps, out_path, format);
    }
    if (wf->parsed()) {
      if ((wf_k > 0.0) == (kappa_level > 0)) {
        std::cerr << "wavefunction: give exactly one of --k or --kappa-level\n";
        return 1;
      }
      return run_wavefunction(alpha, l, wf_k, kappa_level, r_min, r_max,
                              r_steps, out_path, format);
    }
    return run_validate(suite);
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
