#include "thermistor/driver.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace thermistor {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"mesh", {"file", "n", "left", "right", "bottom", "top"}},
      {"model", {"name"}},
      {"material",
       {"sigma_star", "sigma_max", "kappa", "s_c", "k_amp", "rho", "c_p", "theta_ref", "m0", "visc_lambda",
        "visc_mu", "elast_lambda", "elast_mu"}},
      {"friction", {"mu_s", "mu_d", "beta", "d_mu", "F"}},
      {"boundary", {"h_N", "H_N", "voltage", "f0_x", "f0_y", "f2_x", "f2_y"}},
      {"initial", {"theta0"}},
      {"solver",
       {"T", "h", "dt", "eps", "tol_temperature", "max_iter_temperature", "tol_momentum", "max_iter_momentum",
        "max_halvings", "joule_mode", "cascade_levels", "seed", "regularizer"}},
      {"output", {"dir", "stride", "assert"}},
      {"diagnostics", {"dual_norms", "weighted_ceiling", "energy_ceiling", "validation_samples"}},
  };
  return keys;
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) return;
  try {
    target = node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("config key " + key + ": cannot parse '" + node->data() + "'");
  }
}

template <class T>
void read_optional(const pt::ptree& tree, const std::string& key, std::optional<T>& target) {
  if (!tree.get_child_optional(pt::ptree::path_type(key, '.'))) return;
  T value{};
  read(tree, key, value);
  target = value;
}

BoundaryTag parse_tag(const std::string& key, const std::string& text) {
  if (text == "D" || text == "dirichlet") return BoundaryTag::Dirichlet;
  if (text == "N" || text == "neumann") return BoundaryTag::Neumann;
  if (text == "C" || text == "contact") return BoundaryTag::Contact;
  throw ConfigError("config key " + key + ": unknown boundary tag '" + text + "'");
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key " + key + ": expected true or false, got '" + text + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string header_comment(const RunConfig& config) { return "config_hash=" + config.hash; }

std::vector<Vec2> contact_points(const Mesh& mesh) {
  std::vector<Vec2> points;
  for (const auto& edge : mesh.boundary_edges())
    if (edge.tag == BoundaryTag::Contact) {
      points.push_back(mesh.nodes()[edge.a]);
      points.push_back(mesh.nodes()[edge.b]);
    }
  return points;
}

double trace_norm_or_zero(const Discretization& disc) {
  if (disc.mesh.count_edges(BoundaryTag::Contact) == 0) return 0.0;
  return estimate_trace_norm(disc.mesh, disc.dofs);
}

InitialData initial_data(const Discretization& disc, const RunConfig& config) {
  auto data = InitialData::zero(disc);
  data.theta0.setConstant(config.theta0);
  return data;
}

DiagnosticsOptions diagnostics_options(const RunConfig& config, double h) {
  DiagnosticsOptions o;
  o.h = h;
  o.regularizer = config.solver.regularizer_coeff.value_or(h);
  o.dt = config.solver.dt;
  o.dual_norms = config.dual_norms;
  o.weighted_ceiling = config.weighted_ceiling;
  o.energy_ceiling = config.energy_ceiling;
  return o;
}

// Prints the assumption table; returns true when all pass.
bool report_assumptions(const ValidationReport& report, std::ostream& out) {
  for (const auto& c : report.checks) {
    out << c.name << ' ' << (c.passed ? "pass" : "FAIL") << " margin=" << std::setprecision(6) << c.margin;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
  return report.all_passed();
}

ValidationReport validate(const Discretization& disc, const Models& models, const RunConfig& config) {
  ValidationOptions vo;
  vo.seed = config.solver.seed;
  vo.samples = config.validation_samples;
  vo.horizon = config.solver.T;
  vo.contact_points = contact_points(disc.mesh);
  return validate_assumptions(models, trace_norm_or_zero(disc), vo);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + path.string());
  return file;
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

void merge(DiagnosticsReport& into, const DiagnosticsReport& from, double h) {
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
  for (const auto& v : from.violations) {
    std::ostringstream os;
    os << "h=" << h << ' ' << v;
    into.violations.push_back(os.str());
  }
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << '\n';
    return kConfigError;
  }
}

// Shared cascade part of run and cascade; returns the diagnostics of every level.
std::vector<DiagnosticsReport> cascade_and_write(const Discretization& disc, const Models& models,
                                                 const RunConfig& config, const DiagnosticsContext& ctx,
                                                 DiagnosticsReport& all, std::ostream& out) {
  const auto report = run_cascade(disc, models, config.solver, initial_data(disc, config));
  std::vector<DiagnosticsReport> per_level;
  for (const auto& level : report.levels) {
    per_level.push_back(ctx.energy_report(level.trajectory, diagnostics_options(config, level.h)));
    merge(all, per_level.back(), level.h);
  }
  auto file = open_output(config.output_dir / "cascade.csv");
  write_cascade_csv(file, header_comment(config), report, per_level);
  out << "cascade: " << report.levels.size() << " levels, " << report.rows.size() << " Cauchy rows\n";
  return per_level;
}

int finish(const RunConfig& config, const DiagnosticsReport& all, std::ostream& out, std::ostream& err) {
  auto file = open_output(config.output_dir / "diagnostics.csv");
  write_diagnostics_csv(file, header_comment(config), all);
  for (const auto& v : all.violations) err << "violation: " << v << '\n';
  if (!all.ok() && config.assert_mode) return kViolation;
  out << "done: " << all.rows.size() << " diagnostic rows, " << all.violations.size() << " violations\n";
  return kOk;
}

}  // namespace

void RunConfig::validate() const {
  solver.validate();
  if (!mesh.file && mesh.n < 1) throw ConfigError("mesh.n must be at least 1");
  if (stride < 1) throw ConfigError("output.stride must be at least 1");
  if (validation_samples < 1) throw ConfigError("diagnostics.validation_samples must be at least 1");
  if (mesh.file && !std::filesystem::exists(*mesh.file))
    throw ConfigError("mesh file not found: " + mesh.file->string());
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << "line " << e.line() << ": " << e.message();
    throw ConfigError(os.str());
  }
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) throw ConfigError("config key outside a section: " + section);
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
  }

  RunConfig c;
  c.hash = hex64(fnv1a64(text));

  std::string mesh_file;
  read(tree, "mesh.file", mesh_file);
  if (!mesh_file.empty()) c.mesh.file = (base_dir / mesh_file).lexically_normal();
  read(tree, "mesh.n", c.mesh.n);
  for (auto [key, tag] : {std::pair{"left", &c.mesh.tags.left}, std::pair{"right", &c.mesh.tags.right},
                          std::pair{"bottom", &c.mesh.tags.bottom}, std::pair{"top", &c.mesh.tags.top}}) {
    std::string value;
    read(tree, std::string("mesh.") + key, value);
    if (!value.empty()) *tag = parse_tag(std::string("mesh.") + key, value);
  }

  std::string model_name = "ptc";
  read(tree, "model.name", model_name);
  if (model_name != "ptc") throw ConfigError("model.name: unknown model '" + model_name + "'");

  auto& m = c.model;
  read(tree, "material.sigma_star", m.sigma_star);
  read(tree, "material.sigma_max", m.sigma_max);
  read(tree, "material.kappa", m.kappa);
  read(tree, "material.s_c", m.s_c);
  read(tree, "material.k_amp", m.k_amp);
  read(tree, "material.rho", m.rho);
  read(tree, "material.c_p", m.c_p);
  read(tree, "material.theta_ref", m.theta_ref);
  read(tree, "material.m0", m.m0);
  read(tree, "material.visc_lambda", m.visc_lambda);
  read(tree, "material.visc_mu", m.visc_mu);
  read(tree, "material.elast_lambda", m.elast_lambda);
  read(tree, "material.elast_mu", m.elast_mu);
  read(tree, "friction.mu_s", m.mu_s);
  read(tree, "friction.mu_d", m.mu_d);
  read(tree, "friction.beta", m.beta);
  read_optional(tree, "friction.d_mu", m.d_mu);
  read(tree, "friction.F", m.F);
  read(tree, "boundary.h_N", m.h_N);
  read(tree, "boundary.H_N", m.H_N);
  read(tree, "boundary.voltage", m.voltage);
  read(tree, "boundary.f0_x", m.f0.x());
  read(tree, "boundary.f0_y", m.f0.y());
  read(tree, "boundary.f2_x", m.f2.x());
  read(tree, "boundary.f2_y", m.f2.y());
  read(tree, "initial.theta0", c.theta0);

  auto& s = c.solver;
  read(tree, "solver.T", s.T);
  read(tree, "solver.h", s.h);
  read(tree, "solver.dt", s.dt);
  read(tree, "solver.eps", s.eps);
  read(tree, "solver.tol_temperature", s.temperature.tol);
  read(tree, "solver.max_iter_temperature", s.temperature.max_iter);
  read(tree, "solver.tol_momentum", s.momentum.tol);
  read(tree, "solver.max_iter_momentum", s.momentum.max_iter);
  int halvings = s.momentum.max_halvings;
  read(tree, "solver.max_halvings", halvings);
  s.momentum.max_halvings = s.temperature.max_halvings = halvings;
  std::string joule = "direct";
  read(tree, "solver.joule_mode", joule);
  if (joule == "direct")
    s.joule_mode = JouleMode::Direct;
  else if (joule == "reformulated")
    s.joule_mode = JouleMode::Reformulated;
  else
    throw ConfigError("solver.joule_mode: expected direct or reformulated, got '" + joule + "'");
  std::string levels;
  read(tree, "solver.cascade_levels", levels);
  {
    std::istringstream in(levels);
    std::string token;
    while (in >> token) {
      try {
        std::size_t used = 0;
        s.cascade_levels.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::logic_error&) {
        throw ConfigError("solver.cascade_levels: cannot parse '" + token + "'");
      }
    }
  }
  read(tree, "solver.seed", s.seed);
  read_optional(tree, "solver.regularizer", s.regularizer_coeff);

  std::string dir;
  read(tree, "output.dir", dir);
  if (!dir.empty()) c.output_dir = base_dir / dir;
  read(tree, "output.stride", c.stride);
  std::string flag;
  read(tree, "output.assert", flag);
  if (!flag.empty()) c.assert_mode = parse_bool("output.assert", flag);
  flag.clear();
  read(tree, "diagnostics.dual_norms", flag);
  if (!flag.empty()) c.dual_norms = parse_bool("diagnostics.dual_norms", flag);
  read_optional(tree, "diagnostics.weighted_ceiling", c.weighted_ceiling);
  read_optional(tree, "diagnostics.energy_ceiling", c.energy_ceiling);
  read(tree, "diagnostics.validation_samples", c.validation_samples);

  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

Mesh build_mesh(const RunConfig& config) {
  if (config.mesh.file) return load_mesh(*config.mesh.file);
  return build_unit_square_mesh(config.mesh.n, config.mesh.tags);
}

int command_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Discretization disc(build_mesh(config));
    const Models models = default_ptc_model(config.model);
    const auto report = validate(disc, models, config);
    const bool ok = report_assumptions(report, out);
    if (const auto* a8 = report.find("A8")) out << "A8 margin " << std::setprecision(10) << a8->margin << '\n';
    if (!ok) {
      for (const auto& c : report.checks)
        if (!c.passed) err << "assumption " << c.name << " violated: " << c.detail << '\n';
      return int(kViolation);
    }
    out << "all assumptions pass\n";
    return int(kOk);
  });
}

int command_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Discretization disc(build_mesh(config));
    const Models models = default_ptc_model(config.model);
    const auto assumptions = validate(disc, models, config);
    if (!assumptions.all_passed()) {
      for (const auto& c : assumptions.checks)
        if (!c.passed) err << "assumption " << c.name << " violated: " << c.detail << '\n';
      if (config.assert_mode) return int(kViolation);
    }
    prepare_output_dir(config.output_dir);

    const Scheme scheme(disc, models, config.solver);
    auto buffer = scheme.initialize(initial_data(disc, config));
    const auto trajectory = scheme.advance(buffer);
    {
      auto file = open_output(config.output_dir / "trajectory.csv");
      write_trajectory_csv(file, header_comment(config), disc, trajectory, config.stride);
    }
    const DiagnosticsContext ctx(disc, models);
    DiagnosticsReport all;
    merge(all, ctx.energy_report(trajectory, diagnostics_options(config, config.solver.h)), config.solver.h);
    out << "run: " << trajectory.size() - 1 << " steps to T=" << config.solver.T << '\n';
    if (!config.solver.cascade_levels.empty()) cascade_and_write(disc, models, config, ctx, all, out);
    return finish(config, all, out, err);
  });
}

int command_cascade(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.solver.cascade_levels.empty()) throw ConfigError("solver.cascade_levels is empty");
    const Discretization disc(build_mesh(config));
    const Models models = default_ptc_model(config.model);
    prepare_output_dir(config.output_dir);
    const DiagnosticsContext ctx(disc, models);
    DiagnosticsReport all;
    cascade_and_write(disc, models, config, ctx, all, out);
    return finish(config, all, out, err);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermoviscoelastic thermistor simulator with frictional contact"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  bool assert_mode = false;
  int stride = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_flag("--assert", assert_mode, "exit 4 on any invariant violation");
    sub->add_option("--stride", stride, "write every stride-th step to trajectory.csv")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "simulate, write trajectory, diagnostics and cascade CSVs");
  auto* check = app.add_subcommand("check", "validate the model assumptions only");
  auto* cascade = app.add_subcommand("cascade", "run only the delay cascade");
  add_common(run);
  add_common(check);
  add_common(cascade);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? int(kOk) : int(kConfigError);
  }

  RunConfig config;
  try {
    config = load_run_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (assert_mode) config.assert_mode = true;
    if (stride > 0) config.stride = stride;
    config.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (run->parsed()) return command_run(config, out, err);
  if (check->parsed()) return command_check(config, out, err);
  return command_cascade(config, out, err);
}

void write_trajectory_csv(std::ostream& out, const std::string& header_comment, const Discretization& disc,
                          const Trajectory& trajectory, int stride) {
  const auto& dofs = disc.dofs;
  out << "# " << header_comment << '\n' << "step,t";
  for (int node : dofs.scalar_free_nodes) out << ",theta_" << node;
  for (int node : dofs.scalar_free_nodes) out << ",phi_" << node;
  for (int node : dofs.scalar_free_nodes) out << ",u1_" << node << ",u2_" << node;
  for (int node : dofs.scalar_free_nodes) out << ",v1_" << node << ",v2_" << node;
  out << '\n' << std::setprecision(17);
  auto write = [&](const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << x[i];
  };
  for (const auto& s : trajectory) {
    if (s.step % stride != 0) continue;
    out << s.step << ',' << s.t;
    write(s.theta);
    write(s.phi);
    write(s.u);
    write(s.v);
    out << '\n';
  }
}

void write_cascade_csv(std::ostream& out, const std::string& header_comment, const CascadeReport& report,
                       const std::vector<DiagnosticsReport>& diagnostics) {
  out << "# " << header_comment << '\n'
      << "h,h_next,majorant,dual_estimate,surrogate,max_mech_energy,max_thermal_energy,theta_L2H,phi_L2V,v_L2E\n"
      << std::setprecision(17);
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& level = report.levels[i];
    out << level.h << ',';
    if (i < report.rows.size()) out << report.rows[i].h_fine;
    out << ',' << level.majorant << ',' << level.dual_estimate << ',' << level.surrogate << ',';
    if (i < diagnostics.size())
      out << diagnostics[i].max_of(&DiagnosticsRow::mech_energy) << ',' << diagnostics[i].max_of(&DiagnosticsRow::thermal_energy);
    else
      out << ',';
    if (i < report.rows.size())
      out << ',' << report.rows[i].theta_l2h << ',' << report.rows[i].phi_l2v << ',' << report.rows[i].v_l2e;
    else
      out << ",,,";
    out << '\n';
  }
}

}  // namespace thermistor
