#include "anisoswarm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "anisoswarm/io.hpp"

namespace anisoswarm {

namespace {

using ojson = nlohmann::ordered_json;

std::filesystem::path out_file(const RunConfig& rc, const std::string& stem, const std::string& suffix,
                               const std::string& ext) {
  return rc.out_dir / (stem + suffix + ext);
}

void write_json(const std::filesystem::path& path, const ojson& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

SimulateOutcome cmd_simulate(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  const Trajectory traj = simulate(rc.sim, rc.tensor, rc.force, rc.domain);
  SimulateOutcome o;
  o.termination = traj.termination;
  o.t_final = traj.t_final;
  o.max_speed_final = traj.max_speed_final;
  o.n_steps = traj.n_steps;
  o.pattern = classify(traj.final_state().positions, rc.domain, rc.classify);

  write_file_atomic(out_file(rc, "trajectory", suffix, ".csv"), trajectory_csv(traj.snapshots));
  ojson summary = ojson::parse(run_summary_json(traj));
  summary["classification"] = std::string(to_string(o.pattern.cls));
  write_json(out_file(rc, "summary", suffix, ".json"), summary);
  write_file_atomic(out_file(rc, "pattern", suffix, ".json"), pattern_summary_json(o.pattern));

  out << "simulate" << suffix << ": " << to_string(o.termination) << " at t = " << fmt("%.6g", o.t_final)
      << " after " << o.n_steps << " steps; pattern " << to_string(o.pattern.cls)
      << " (R = " << fmt("%.6g", o.pattern.fitted_R) << ", r = " << fmt("%.6g", o.pattern.fitted_r)
      << ", e = " << fmt("%.4f", o.pattern.eccentricity) << ", clusters " << o.pattern.cluster_count
      << ")\n";
  return o;
}

RingOutcome cmd_ring(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  RingOutcome o;
  o.n = rc.ring_n;
  o.R_continuous = solve_ring_radius(rc.force, rc.quadrature);
  o.R_discrete = solve_discrete_ring(rc.ring_n, rc.force);
  o.relative_difference = std::abs(o.R_discrete - o.R_continuous) / o.R_continuous;

  ojson j;
  j["R_continuous"] = o.R_continuous;
  j["R_discrete"] = o.R_discrete;
  j["n_particles"] = o.n;
  j["relative_difference"] = o.relative_difference;
  write_json(out_file(rc, "ring", suffix, ".json"), j);

  out << "ring radius: continuous " << fmt("%.10g", o.R_continuous) << ", discrete (N = " << o.n
      << ") " << fmt("%.10g", o.R_discrete) << ", relative difference "
      << fmt("%.3g", o.relative_difference) << "\n";
  return o;
}

BranchOutcome cmd_ellipse_branch(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  BranchOutcome o;
  o.continuous = ellipse_branch(rc.force, rc.branch_points, rc.quadrature);
  write_file_atomic(out_file(rc, "branch", suffix, ".csv"), branch_csv(o.continuous));

  const double r_bar = o.continuous.trivial_endpoint.r;
  for (int i = 0; i < rc.branch_points; ++i) {
    const double r = r_bar * i / rc.branch_points;
    try {
      const DiscreteEllipse t = solve_discrete_ellipse(rc.branch_discrete_n, r, rc.force);
      o.discrete.push_back({r, t.R, t.chi, eccentricity(t.R, r)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRoot) throw;
      break;
    }
  }
  std::ostringstream csv;
  csv << "r,R,chi,eccentricity\n";
  for (const auto& row : o.discrete) {
    csv << format_double(row.r) << ',' << format_double(row.R) << ',' << format_double(row.chi) << ','
        << format_double(row.eccentricity) << '\n';
  }
  write_file_atomic(out_file(rc, "branch_discrete", suffix, ".csv"), csv.str());

  out << "ellipse branch: " << o.continuous.tuples.size() << " tuples from (R, r, chi) = ("
      << fmt("%.6g", o.continuous.ring_endpoint.R) << ", 0, 1) to (0, " << fmt("%.6g", r_bar) << ", "
      << fmt("%.6g", o.continuous.trivial_endpoint.chi) << "); discrete N = " << rc.branch_discrete_n
      << " tuples: " << o.discrete.size() << "\n";
  return o;
}

std::vector<SweepRow> cmd_stability(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  AnsatzSpec spec;
  spec.n_particles = rc.stability_n;
  DomainSpec domain = DomainSpec::plane();
  std::vector<double> chis = rc.stability_chi;
  if (chis.empty()) chis.push_back(rc.tensor.chi);

  if (rc.stability_ansatz == "line") {
    spec.kind = ansatz::Line{};
    domain = DomainSpec::torus();
  } else if (rc.stability_ansatz == "ring") {
    const double R = rc.stability_R > 0.0 ? rc.stability_R : solve_discrete_ring(rc.stability_n, rc.force);
    spec.kind = ansatz::Ring{R};
  } else {
    double R = rc.stability_R;
    if (R == 0.0) {
      const DiscreteEllipse t = solve_discrete_ellipse(rc.stability_n, rc.stability_r, rc.force);
      R = t.R;
      if (rc.stability_chi.empty()) chis = {t.chi};
    }
    spec.kind = ansatz::Ellipse{R, rc.stability_r};
  }

  const StabilityOptions opt{rc.eps_zero, rc.residual_gate};
  std::vector<SweepRow> rows;
  for (double chi : chis) {
    rows.push_back({chi, stability(spec, chi, rc.force, domain, opt)});
    const auto& rep = rows.back().report;
    out << "stability " << rc.stability_ansatz << " N = " << rc.stability_n << " chi = " << fmt("%.6g", chi)
        << ": " << to_string(rep.classification) << " (max Re = " << fmt("%.6g", rep.max_real_nonzero)
        << ", zero modes " << rep.n_zero_modes << ")\n";
  }
  write_file_atomic(out_file(rc, "stability", suffix, ".csv"), stability_sweep_csv(rows));
  return rows;
}

ThresholdResult cmd_line_threshold(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  const StabilityOptions opt{rc.eps_zero, rc.residual_gate};
  const ThresholdResult t = line_stability_threshold(rc.threshold_n, rc.force, rc.threshold_tol_chi, opt);
  ojson j;
  j["n_particles"] = rc.threshold_n;
  j["chi_star"] = t.chi_star;
  j["chi_stable"] = t.chi_stable;
  j["chi_unstable"] = t.chi_unstable;
  j["evaluations"] = t.evaluations;
  write_json(out_file(rc, "threshold", suffix, ".json"), j);
  out << "line stability threshold (N = " << rc.threshold_n << "): chi* = " << fmt("%.6f", t.chi_star)
      << ", stable at " << fmt("%.6f", t.chi_stable) << ", unstable at " << fmt("%.6f", t.chi_unstable)
      << "\n";
  return t;
}

StripeOutcome cmd_stripe(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  StripeOutcome o;
  o.value = stripe_condition(rc.stripe_Delta, rc.stripe_x1, rc.force, rc.tensor.chi, rc.quadrature);
  o.equilibrium = std::abs(o.value) <= rc.stripe_tol;
  ojson j;
  j["Delta"] = rc.stripe_Delta;
  j["x1"] = rc.stripe_x1;
  j["chi"] = rc.tensor.chi;
  j["value"] = o.value;
  j["equilibrium"] = o.equilibrium;
  write_json(out_file(rc, "stripe", suffix, ".json"), j);
  out << "stripe condition (Delta = " << fmt("%.6g", rc.stripe_Delta) << ", x1 = "
      << fmt("%.6g", rc.stripe_x1) << ", chi = " << fmt("%.6g", rc.tensor.chi)
      << "): " << fmt("%.6g", o.value) << ", " << (o.equilibrium ? "equilibrium" : "not an equilibrium")
      << "\n";
  return o;
}

PatternSummary cmd_classify(const RunConfig& rc, const std::string& suffix, std::ostream& out) {
  if (rc.classify_input.empty()) throw Error(ErrorCode::InvalidConfig, "classify needs classify.input");
  const auto x = read_positions_csv(rc.classify_input);
  const PatternSummary s = classify(x, rc.domain, rc.classify);
  write_file_atomic(out_file(rc, "pattern", suffix, ".json"), pattern_summary_json(s));
  out << "classify: " << to_string(s.cls) << " (R = " << fmt("%.6g", s.fitted_R) << ", r = "
      << fmt("%.6g", s.fitted_r) << ", e = " << fmt("%.4f", s.eccentricity) << ", extent "
      << fmt("%.4f", s.vertical_extent) << ", clusters " << s.cluster_count << ")\n";
  return s;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidConfig:
    case ErrorCode::NotUnit:
      return 2;
    case ErrorCode::FileError:
      return 3;
    default:
      return 4;
  }
}

int run_command(const std::string& name, const ConfigMap& map, std::ostream& out, std::ostream& err) {
  using Fn = void (*)(const RunConfig&, const std::string&, std::ostream&);
  static const std::pair<const char*, Fn> table[] = {
      {"simulate", [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_simulate(r, s, o); }},
      {"ring", [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_ring(r, s, o); }},
      {"ellipse-branch",
       [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_ellipse_branch(r, s, o); }},
      {"stability", [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_stability(r, s, o); }},
      {"line-threshold",
       [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_line_threshold(r, s, o); }},
      {"stripe", [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_stripe(r, s, o); }},
      {"classify", [](const RunConfig& r, const std::string& s, std::ostream& o) { cmd_classify(r, s, o); }},
  };
  Fn fn = nullptr;
  for (const auto& [n, f] : table) {
    if (name == n) fn = f;
  }
  if (!fn) {
    err << "error: unknown subcommand '" << name << "'\n";
    return 2;
  }

  std::vector<SweepPoint> points;
  std::vector<RunConfig> configs;
  try {
    points = expand_sweep(map);
    for (const auto& p : points) configs.push_back(build_run_config(p.config));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code()) == 4 ? 2 : exit_code_for(e.code());
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      std::error_code ec;
      std::filesystem::create_directories(configs[i].out_dir, ec);
      if (ec) {
        throw Error(ErrorCode::FileError,
                    "cannot create output directory '" + configs[i].out_dir.string() + "': " + ec.message());
      }
      write_file_atomic(configs[i].out_dir / ("config" + points[i].suffix + ".ini"), points[i].config.to_ini());
      fn(configs[i], points[i].suffix, out);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 3;
    }
  }
  return 0;
}

}  // namespace anisoswarm
