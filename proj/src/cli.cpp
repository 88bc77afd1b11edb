#include "gmhf/cli.h"

#include "gmhf/errors.h"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace gmhf {

MoleculeSpec parse_molecule(std::istream &is) {
  MoleculeSpec mol;
  std::vector<int> nucleus_lines;
  bool have_orbitals = false;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    std::string extra;
    if (first == "orbitals") {
      int n = 0;
      if (have_orbitals)
        throw ValidationError(fmt::format("line {}: duplicate 'orbitals' line", line_no));
      if (!(ls >> n) || (ls >> extra))
        throw ValidationError(fmt::format("line {}: expected 'orbitals N'", line_no));
      if (n < 1)
        throw ValidationError(fmt::format("line {}: orbital count must be positive", line_no));
      mol.n_orbitals = n;
      have_orbitals = true;
      continue;
    }
    Nucleus nuc{};
    std::istringstream full(line);
    if (!(full >> nuc.charge >> nuc.position.x() >> nuc.position.y() >> nuc.position.z()) ||
        (full >> extra))
      throw ValidationError(fmt::format("line {}: expected 'Z x y z'", line_no));
    if (!std::isfinite(nuc.charge) || !nuc.position.allFinite())
      throw ValidationError(fmt::format("line {}: non-finite value", line_no));
    if (!(nuc.charge < 0.0))
      throw ValidationError(
          fmt::format("line {}: nuclear charge must be negative, got {}", line_no, nuc.charge));
    for (std::size_t k = 0; k < mol.nuclei.size(); ++k)
      if (mol.nuclei[k].position == nuc.position)
        throw ValidationError(fmt::format(
            "line {}: duplicate nuclear position (also on line {})", line_no, nucleus_lines[k]));
    mol.nuclei.push_back(nuc);
    nucleus_lines.push_back(line_no);
  }
  if (!have_orbitals) throw ValidationError("missing 'orbitals N' line");
  mol.validate();
  return mol;
}

MoleculeSpec parse_molecule_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open molecule file '{}'", path));
  try {
    return parse_molecule(in);
  } catch (const ValidationError &e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

namespace {

void append_stats(std::string &s, const std::string &prefix, const GroupStatistics &g) {
  s += fmt::format("{}_n_global={}\n", prefix, g.n_global);
  s += fmt::format("{}_n_groups={}\n", prefix, g.n_groups);
  s += fmt::format("{}_n_max={}\n", prefix, g.n_max);
  s += fmt::format("{}_n_min={}\n", prefix, g.n_min);
  s += fmt::format("{}_n_ave={:.1f}\n", prefix, g.n_ave);
  s += fmt::format("{}_n_discarded={}\n", prefix, g.n_discarded);
}

} // namespace

std::string RunReport::to_text() const {
  std::string s;
  s += fmt::format("converged={}\n", converged ? 1 : 0);
  s += fmt::format("iterations={}\n", iterations);
  for (std::size_t j = 0; j < energy.orbital_energies.size(); ++j) {
    s += fmt::format("orbital_energy_{}={:.17g}\n", j + 1, energy.orbital_energies[j]);
    s += fmt::format("kinetic_{}={:.17g}\n", j + 1, energy.kinetic[j]);
    s += fmt::format("external_{}={:.17g}\n", j + 1, energy.external[j]);
  }
  s += fmt::format("nuclear_repulsion={:.17g}\n", energy.nuclear_repulsion);
  s += fmt::format("total_energy={:.17g}\n", energy.total);
  for (std::size_t j = 0; j < orbital_terms.size(); ++j)
    s += fmt::format("terms_{}={}\n", j + 1, orbital_terms[j]);
  for (std::size_t j = 0; j < orbital_stats.size(); ++j)
    append_stats(s, fmt::format("phi_{}", j + 1), orbital_stats[j]);
  for (std::size_t j = 0; j < vtot_stats.size(); ++j)
    append_stats(s, fmt::format("vtot_phi_{}", j + 1), vtot_stats[j]);
  s += fmt::format("box_violations={}\n", box_violations);
  s += fmt::format("centers_checked={}\n", centers_checked);
  s += fmt::format("wall_time_s={:.3f}\n", wall_time_s);
  return s;
}

RunReport make_report(const ScfState &state, const EnergyBreakdown &energy,
                      const MoleculeSpec &mol, const ScfConfig &cfg, double wall_time_s) {
  RunReport r;
  r.converged = state.converged;
  r.iterations = state.iteration;
  r.energy = energy;
  const auto grouping = cfg.effective_grouping();
  for (const auto &phi : state.orbital_mixtures()) {
    r.orbital_terms.push_back(phi.size());
    r.orbital_stats.push_back(group_statistics(phi, mol, grouping));
  }
  if (!state.history.empty()) r.vtot_stats = state.history.back().vtot_stats;
  r.box_violations = state.box_violations;
  r.centers_checked = state.centers_checked;
  r.wall_time_s = wall_time_s;
  return r;
}

void write_line_samples(std::ostream &os, const std::vector<GaussianMixture> &orbitals,
                        char axis, double a, double b, std::size_t n) {
  int k = 0;
  if (axis == 'x') k = 0;
  else if (axis == 'y') k = 1;
  else if (axis == 'z') k = 2;
  else throw ValidationError(fmt::format("axis must be x, y or z, got '{}'", axis));
  if (n < 2) throw ValidationError("line samples need at least 2 points");
  os << axis;
  for (std::size_t j = 0; j < orbitals.size(); ++j) os << fmt::format(",phi_{}", j + 1);
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    Vec3 x = Vec3::Zero();
    x[k] = t;
    os << fmt::format("{:.17g}", t);
    for (const auto &phi : orbitals) os << fmt::format(",{:.17g}", evaluate(phi, x));
    os << '\n';
  }
}

namespace {

struct Options {
  std::string molecule;
  std::string preset;
  std::vector<std::string> guesses;
  double eps = 1e-6;
  double energy_tol = 4e-6;
  double sigma_far = 1.0;
  int max_iter = 100;
  std::string dump_dir;
  std::vector<std::string> line_samples;
  std::string line_samples_out = "line_samples.csv";
  std::string report;
  std::string reduction_log;
  std::string dump_coulomb;
  bool no_ee = false;
};

std::ofstream open_output(const std::string &path) {
  std::ofstream f(path);
  if (!f) throw ValidationError(fmt::format("cannot write '{}'", path));
  return f;
}

GaussianMixture read_mixture_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open mixture file '{}'", path));
  try {
    return read_mixture(in);
  } catch (const ValidationError &e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

// Default guess for a molecule file: orbital j is one atom on nucleus j mod L,
// narrower each time the nuclei are cycled through.
std::vector<GaussianMixture> default_guess(const MoleculeSpec &mol) {
  std::vector<GaussianMixture> guess;
  const std::size_t nl = mol.nuclei.size();
  for (int j = 0; j < mol.n_orbitals; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double sigma = 10.0 * std::pow(0.25, static_cast<double>(ju / nl));
    guess.push_back(GaussianMixture{{{1.0, mol.nuclei[ju % nl].position, sigma}}});
  }
  return guess;
}

int execute(const Options &opt, std::ostream &out) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  MoleculeSpec mol;
  if (!opt.molecule.empty())
    mol = parse_molecule_file(opt.molecule);
  else if (opt.preset == "heh+")
    mol = heh_cation();
  else if (opt.preset == "lih")
    mol = lithium_hydride();
  else
    throw ValidationError("give --molecule <path> or --preset heh+|lih");

  ScfConfig cfg;
  cfg.reduction_eps = opt.eps;
  cfg.energy_tol = opt.energy_tol;
  cfg.max_iterations = opt.max_iter;
  cfg.grouping.sigma_far = opt.sigma_far;
  cfg.electron_interaction = !opt.no_ee;
  cfg.validate();

  std::vector<GaussianMixture> guess;
  if (!opt.guesses.empty()) {
    for (const auto &g : opt.guesses) guess.push_back(read_mixture_file(g));
  } else if (!opt.preset.empty()) {
    guess = preset_guess(opt.preset, mol);
  } else {
    guess = default_guess(mol);
  }

  std::ofstream reduction_log;
  if (!opt.reduction_log.empty()) {
    reduction_log = open_output(opt.reduction_log);
    reduction_log << "# iteration group input_terms output_terms error_bound\n";
  }
  cfg.on_iteration = [&](const IterationRecord &rec) {
    std::string line = fmt::format("iter {}", rec.iteration);
    for (double e : rec.energies) line += fmt::format(" {:.10f}", e);
    for (auto t : rec.orbital_terms) line += fmt::format(" {}", t);
    line += fmt::format(" {:.2f}", rec.elapsed_s);
    out << line << std::endl;
    if (reduction_log.is_open())
      for (const auto &r : rec.reductions)
        reduction_log << fmt::format("{} {} {} {} {:.3e}\n", rec.iteration, r.key.to_string(),
                                     r.input_terms, r.output_terms, r.error_bound);
  };

  const auto coulomb = coulomb_reference_expansion();
  if (!opt.dump_coulomb.empty()) {
    auto f = open_output(opt.dump_coulomb);
    write_expansion(f, coulomb);
  }

  auto state = initialize(mol, guess, coulomb, cfg);
  {
    std::string line = "iter 0";
    for (double e : state.energies) line += fmt::format(" {:.10f}", e);
    for (std::size_t j = 0; j < state.orbitals.functions(); ++j)
      line += fmt::format(" {}", state.orbitals.size());
    line += fmt::format(" {:.2f}", std::chrono::duration<double>(Clock::now() - start).count());
    out << line << std::endl;
  }
  state = run(mol, cfg, std::move(state), coulomb);
  const auto energy = total_energy(state, mol, coulomb, cfg);
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  const auto report = make_report(state, energy, mol, cfg, wall);

  out << fmt::format("{} after {} iterations\n", state.converged ? "converged" : "NOT converged",
                     state.iteration);
  for (std::size_t j = 0; j < energy.orbital_energies.size(); ++j)
    out << fmt::format("E_{} = {:.10f}\n", j + 1, energy.orbital_energies[j]);
  out << fmt::format("E_tot = {:.10f}\n", energy.total);

  if (!opt.report.empty()) {
    auto f = open_output(opt.report);
    f << report.to_text();
  }
  const auto orbitals = state.orbital_mixtures();
  if (!opt.dump_dir.empty()) {
    std::filesystem::create_directories(opt.dump_dir);
    for (std::size_t j = 0; j < orbitals.size(); ++j) {
      auto f = open_output(
          (std::filesystem::path(opt.dump_dir) / fmt::format("orbital_{}.txt", j + 1)).string());
      f << fmt::format("# orbital {} energy {:.17g}\n", j + 1, energy.orbital_energies[j]);
      write_mixture(f, orbitals[j]);
    }
  }
  if (!opt.line_samples.empty()) {
    const auto &ls = opt.line_samples;
    if (ls[0].size() != 1) throw ValidationError("line-samples axis must be x, y or z");
    double a = 0, b = 0;
    long n = 0;
    try {
      a = std::stod(ls[1]);
      b = std::stod(ls[2]);
      n = std::stol(ls[3]);
    } catch (const std::exception &) {
      throw ValidationError("line-samples expects <axis> <a> <b> <n>");
    }
    if (n < 2) throw ValidationError("line-samples needs n >= 2");
    auto f = open_output(opt.line_samples_out);
    write_line_samples(f, orbitals, ls[0][0], a, b, static_cast<std::size_t>(n));
  }
  return state.converged ? exit_converged : exit_not_converged;
}

} // namespace

int run_command(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Hartree-Fock solver on Gaussian mixtures"};
  Options opt;
  app.add_option("--molecule", opt.molecule, "Molecule file (orbitals N, then Z x y z lines)");
  app.add_option("--preset", opt.preset, "Built-in experiment and initial guess")
      ->check(CLI::IsMember({"heh+", "lih"}));
  app.add_option("--guess", opt.guesses, "Initial orbital mixture file, one per orbital");
  app.add_option("--eps", opt.eps, "Reduction tolerance")->capture_default_str();
  app.add_option("--energy-tol", opt.energy_tol, "Orbital energy convergence tolerance")
      ->capture_default_str();
  app.add_option("--sigma-far", opt.sigma_far, "Shape threshold of the global group")
      ->capture_default_str();
  app.add_option("--max-iter", opt.max_iter, "Iteration limit")->capture_default_str();
  app.add_option("--dump-orbitals", opt.dump_dir, "Directory for final orbital mixtures");
  app.add_option("--line-samples", opt.line_samples, "Sample orbitals: <axis> <a> <b> <n>")
      ->expected(4);
  app.add_option("--line-samples-out", opt.line_samples_out, "CSV path for --line-samples")
      ->capture_default_str();
  app.add_option("--report", opt.report, "Write a key=value run report");
  app.add_option("--reduction-log", opt.reduction_log, "Write one line per group reduction");
  app.add_option("--dump-coulomb", opt.dump_coulomb, "Write the 1/r expansion");
  app.add_flag("--no-ee", opt.no_ee, "Disable electron-electron terms (one-electron mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_converged : exit_validation;
  }

  try {
    return execute(opt, out);
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception &e) {
    err << "internal failure: " << e.what() << '\n';
    return exit_numerical;
  }
}

} // namespace gmhf
