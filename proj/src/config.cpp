#include "anisoswarm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "anisoswarm/io.hpp"
#include "anisoswarm/rng.hpp"

namespace anisoswarm {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  const auto r = std::from_chars(b, e, x);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x)) {
    bad("'" + key + "' expects a finite number, got '" + v + "'");
  }
  return x;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T x{};
  const char* e = v.data() + v.size();
  const auto r = std::from_chars(v.data(), e, x);
  if (r.ec != std::errc() || r.ptr != e) bad("'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

int positive_int(const ConfigMap& m, const std::string& key) {
  const long v = m.get_int(key);
  if (v < 1 || v > 100000000) bad("'" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

ConfigMap ConfigMap::defaults() {
  ConfigMap m;
  m.entries_ = {
      {"run.out", "out"},
      {"run.max_sweep_points", "10000"},
      {"sim.n_particles", "600"},
      {"sim.dt", "0.2"},
      {"sim.integrator", "euler"},
      {"sim.abs_tol", "1e-6"},
      {"sim.rel_tol", "1e-6"},
      {"sim.t_end", "2000"},
      {"sim.stationarity_tol", "1e-9"},
      {"sim.seed", "1"},
      {"sim.perturbation_delta", "0"},
      {"sim.snapshot_every", "0"},
      {"sim.initial", "gaussian"},
      {"init.mean_x", "0.5"},
      {"init.mean_y", "0.5"},
      {"init.sigma", "0.005"},
      {"init.center_x", "0.5"},
      {"init.center_y", "0.5"},
      {"init.R", "0.005"},
      {"init.r", "0"},
      {"init.file", ""},
      {"force.alpha", "270"},
      {"force.beta", "0.1"},
      {"force.gamma", "35"},
      {"force.e_A", "95"},
      {"force.e_R", "100"},
      {"force.delta_A", "1"},
      {"force.delta_R", "1"},
      {"force.cutoff", "0.5"},
      {"tensor.chi", "1"},
      {"tensor.direction", "homogeneous"},
      {"tensor.theta", "0"},
      {"tensor.center_x", "0.5"},
      {"tensor.center_y", "0.5"},
      {"tensor.amplitude", "0"},
      {"tensor.k_x", "0"},
      {"tensor.k_y", "0"},
      {"tensor.grid_file", ""},
      {"domain.kind", "torus"},
      {"quadrature.panels", "64"},
      {"quadrature.nodes_per_panel", "8"},
      {"quadrature.refinement_tol", "1e-10"},
      {"quadrature.max_doublings", "10"},
      {"metrics.link_radius", "0.02"},
      {"metrics.line_min_extent", "0.9"},
      {"metrics.line_max_horizontal_std", "0.01"},
      {"metrics.ring_max_eccentricity", "0.1"},
      {"metrics.ring_max_radial_spread", "0.1"},
      {"metrics.ellipse_max_boundary_rms", "0.15"},
      {"ring.n_particles", "600"},
      {"branch.points", "50"},
      {"branch.discrete_n", "600"},
      {"stability.ansatz", "ring"},
      {"stability.n_particles", "600"},
      {"stability.R", "0"},
      {"stability.r", "0"},
      {"stability.chi", ""},
      {"stability.eps_zero", "1e-8"},
      {"stability.residual_gate", "1e-8"},
      {"threshold.n_particles", "1200"},
      {"threshold.tol_chi", "1e-3"},
      {"stripe.Delta", "0.05"},
      {"stripe.x1", "0.01"},
      {"stripe.tol", "1e-12"},
      {"classify.input", ""},
  };
  return m;
}

std::pair<std::string, std::string>* ConfigMap::find(const std::string& key) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  return it == entries_.end() ? nullptr : &*it;
}

bool ConfigMap::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

void ConfigMap::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key.rfind("sweep.", 0) == 0) {
    const std::string path = key.substr(6);
    if (!contains(path) || path.rfind("run.", 0) == 0) bad("unknown sweep parameter '" + path + "'");
    if (split_list(value).empty()) bad("sweep axis '" + path + "' has no values");
    auto it = std::find_if(sweep_.begin(), sweep_.end(), [&](const auto& e) { return e.first == path; });
    if (it == sweep_.end()) {
      sweep_.emplace_back(path, value);
    } else {
      it->second = value;
    }
    return;
  }
  auto* e = find(key);
  if (!e) bad("unknown configuration key '" + key + "'");
  e->second = value;
}

void ConfigMap::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("override '" + assignment + "' is not KEY=VALUE");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void ConfigMap::merge_ini_string(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    bad(std::string("config syntax error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) bad("entry '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) set(section + "." + key, value.data());
  }
}

void ConfigMap::merge_ini_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    merge_ini_string(ss.str());
  } catch (const Error& e) {
    bad(path.string() + ": " + e.what());
  }
}

const std::string& ConfigMap::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  bad("unknown configuration key '" + key + "'");
}

double ConfigMap::get_double(const std::string& key) const { return parse_double(key, get(key)); }

long ConfigMap::get_int(const std::string& key) const { return parse_integer<long>(key, get(key)); }

std::uint64_t ConfigMap::get_u64(const std::string& key) const {
  return parse_integer<std::uint64_t>(key, get(key));
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) out.push_back(parse_double(key, item));
  return out;
}

std::string ConfigMap::to_ini() const {
  std::ostringstream os;
  std::string section;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  if (!sweep_.empty()) {
    os << "\n[sweep]\n";
    for (const auto& [path, values] : sweep_) os << path << " = " << values << '\n';
  }
  return os.str();
}

RunConfig build_run_config(const ConfigMap& m) {
  RunConfig rc;
  try {
    rc.out_dir = m.get("run.out");
    if (rc.out_dir.empty()) bad("run.out must not be empty");

    SimConfig& s = rc.sim;
    s.n_particles = positive_int(m, "sim.n_particles");
    s.dt = m.get_double("sim.dt");
    const std::string integ = m.get("sim.integrator");
    if (integ == "euler") {
      s.integrator.kind = IntegratorKind::EulerFixed;
    } else if (integ == "dopri") {
      s.integrator.kind = IntegratorKind::DormandPrinceAdaptive;
    } else {
      bad("sim.integrator must be 'euler' or 'dopri', got '" + integ + "'");
    }
    s.integrator.abs_tol = m.get_double("sim.abs_tol");
    s.integrator.rel_tol = m.get_double("sim.rel_tol");
    s.t_end = m.get_double("sim.t_end");
    s.stationarity_tol = m.get_double("sim.stationarity_tol");
    s.seed = m.get_u64("sim.seed");
    s.perturbation_delta = m.get_double("sim.perturbation_delta");
    const long snap = m.get_int("sim.snapshot_every");
    if (snap < 0 || snap > 1000000000) bad("sim.snapshot_every must be >= 0");
    s.snapshot_every = static_cast<int>(snap);

    const Vec2 center{m.get_double("init.center_x"), m.get_double("init.center_y")};
    const std::string init = m.get("sim.initial");
    if (init == "gaussian") {
      const double sigma = m.get_double("init.sigma");
      s.initial = initial::Gaussian{{m.get_double("init.mean_x"), m.get_double("init.mean_y")},
                                    {sigma, sigma}};
    } else if (init == "uniform") {
      s.initial = initial::UniformRandom{};
    } else if (init == "ring") {
      s.initial = initial::RingEquiangular{center, m.get_double("init.R")};
    } else if (init == "ellipse") {
      s.initial = initial::EllipseEquiangular{center, m.get_double("init.R"), m.get_double("init.r")};
    } else if (init == "line") {
      s.initial = initial::LineUniform{center};
    } else if (init == "file") {
      if (m.get("init.file").empty()) bad("sim.initial = file needs init.file");
      s.initial = initial::FromFile{m.get("init.file")};
    } else {
      bad("sim.initial must be gaussian, uniform, ring, ellipse, line or file; got '" + init + "'");
    }

    ForceParams& f = rc.force;
    f.alpha = m.get_double("force.alpha");
    f.beta = m.get_double("force.beta");
    f.gamma = m.get_double("force.gamma");
    f.e_A = m.get_double("force.e_A");
    f.e_R = m.get_double("force.e_R");
    f.delta_A = m.get_double("force.delta_A");
    f.delta_R = m.get_double("force.delta_R");
    f.cutoff = m.get_double("force.cutoff");

    TensorFieldSpec& t = rc.tensor;
    t.chi = m.get_double("tensor.chi");
    const std::string dir = m.get("tensor.direction");
    if (dir == "homogeneous") {
      t.direction = direction::Homogeneous{m.get_double("tensor.theta")};
    } else if (dir == "circular") {
      t.direction = direction::Circular{{m.get_double("tensor.center_x"), m.get_double("tensor.center_y")}};
    } else if (dir == "sinusoidal") {
      t.direction = direction::SinusoidalAngle{m.get_double("tensor.amplitude"),
                                               {m.get_double("tensor.k_x"), m.get_double("tensor.k_y")}};
    } else if (dir == "grid") {
      if (m.get("tensor.grid_file").empty()) bad("tensor.direction = grid needs tensor.grid_file");
      t.direction = direction::PiecewiseGrid::load_csv(m.get("tensor.grid_file"));
    } else {
      bad("tensor.direction must be homogeneous, circular, sinusoidal or grid; got '" + dir + "'");
    }

    const std::string kind = m.get("domain.kind");
    if (kind == "torus") {
      rc.domain = DomainSpec::torus();
    } else if (kind == "plane") {
      rc.domain = DomainSpec::plane();
    } else {
      bad("domain.kind must be 'torus' or 'plane', got '" + kind + "'");
    }

    QuadratureSpec& q = rc.quadrature;
    q.panels = positive_int(m, "quadrature.panels");
    q.nodes_per_panel = positive_int(m, "quadrature.nodes_per_panel");
    q.refinement_tol = m.get_double("quadrature.refinement_tol");
    q.max_doublings = static_cast<int>(m.get_int("quadrature.max_doublings"));

    ClassifyOptions& c = rc.classify;
    c.link_radius = m.get_double("metrics.link_radius");
    c.line_min_extent = m.get_double("metrics.line_min_extent");
    c.line_max_horizontal_std = m.get_double("metrics.line_max_horizontal_std");
    c.ring_max_eccentricity = m.get_double("metrics.ring_max_eccentricity");
    c.ring_max_radial_spread = m.get_double("metrics.ring_max_radial_spread");
    c.ellipse_max_boundary_rms = m.get_double("metrics.ellipse_max_boundary_rms");

    rc.ring_n = positive_int(m, "ring.n_particles");
    rc.branch_points = positive_int(m, "branch.points");
    if (rc.branch_points < 2) bad("branch.points must be >= 2");
    rc.branch_discrete_n = positive_int(m, "branch.discrete_n");

    rc.stability_ansatz = m.get("stability.ansatz");
    if (rc.stability_ansatz != "ring" && rc.stability_ansatz != "ellipse" &&
        rc.stability_ansatz != "line") {
      bad("stability.ansatz must be ring, ellipse or line");
    }
    rc.stability_n = positive_int(m, "stability.n_particles");
    rc.stability_R = m.get_double("stability.R");
    rc.stability_r = m.get_double("stability.r");
    rc.stability_chi = m.get_double_list("stability.chi");
    rc.eps_zero = m.get_double("stability.eps_zero");
    rc.residual_gate = m.get_double("stability.residual_gate");
    if (rc.stability_R < 0.0 || rc.stability_r < 0.0 || rc.eps_zero < 0.0 || !(rc.residual_gate > 0.0)) {
      bad("stability.R, stability.r, stability.eps_zero must be >= 0 and residual_gate > 0");
    }

    rc.threshold_n = positive_int(m, "threshold.n_particles");
    rc.threshold_tol_chi = m.get_double("threshold.tol_chi");
    if (!(rc.threshold_tol_chi > 0.0)) bad("threshold.tol_chi must be > 0");

    rc.stripe_Delta = m.get_double("stripe.Delta");
    rc.stripe_x1 = m.get_double("stripe.x1");
    rc.stripe_tol = m.get_double("stripe.tol");

    rc.classify_input = m.get("classify.input");

    s.validate();
    f.validate();
    t.validate();
    q.validate();
    c.validate();
    check_domain(rc.domain, f);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::NotUnit) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
    throw;
  }
  return rc;
}

std::string sweep_value_label(const std::string& value) {
  double x = 0.0;
  const char* e = value.data() + value.size();
  const auto r = std::from_chars(value.data(), e, x);
  if (r.ec == std::errc() && r.ptr == e && std::isfinite(x)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
  }
  std::string out;
  for (char ch : value) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ? ch : '_';
  return out;
}

std::vector<SweepPoint> expand_sweep(const ConfigMap& map) {
  const auto& axes = map.sweep_axes();
  if (axes.empty()) return {SweepPoint{map, "", 0}};

  std::vector<std::vector<std::string>> values;
  std::size_t total = 1;
  const long cap = map.get_int("run.max_sweep_points");
  for (const auto& [path, list] : axes) {
    values.push_back(split_list(list));
    total *= values.back().size();
    if (cap < 1 || total > static_cast<std::size_t>(cap)) {
      bad("sweep has more than run.max_sweep_points = " + std::to_string(cap) + " points");
    }
  }
  const std::uint64_t base_seed = map.get_u64("sim.seed");
  std::vector<SweepPoint> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    SweepPoint pt{map, "", idx};
    pt.config.clear_sweep();
    std::size_t rem = idx;
    std::vector<std::size_t> digits(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      digits[a] = rem % values[a].size();
      rem /= values[a].size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& path = axes[a].first;
      const std::string& v = values[a][digits[a]];
      pt.config.set(path, v);
      pt.suffix += "_" + path.substr(path.rfind('.') + 1) + "_" + sweep_value_label(v);
    }
    if (std::none_of(axes.begin(), axes.end(), [](const auto& ax) { return ax.first == "sim.seed"; })) {
      pt.config.set("sim.seed", std::to_string(derive_seed(base_seed, idx)));
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace anisoswarm
