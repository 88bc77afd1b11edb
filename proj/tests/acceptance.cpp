// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion,
// preceded by the measurements it was judged on.

#include "gmhf/errors.h"
#include "gmhf/kernel.h"
#include "gmhf/operators.h"
#include "gmhf/reduction.h"
#include "gmhf/scf.h"
#include "oracles.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace gmhf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string &what) {
    notes.push_back(fmt::format("  [{}] {}", ok ? "ok" : "!!", what));
    pass = pass && ok;
  }
};

std::map<int, Outcome> results;

void report(int id, const std::string &title, const Outcome &o) {
  for (const auto &n : o.notes) std::cout << n << '\n';
  std::cout << fmt::format("criterion {}: {} - {}\n", id, o.pass ? "PASS" : "FAIL", title)
            << std::flush;
  results[id] = o;
}

// Criteria named on the command line; all of them when empty.
std::set<int> selected;
// Criteria whose failure is documented and should not fail the run. They
// still print FAIL.
std::set<int> known_failures;

// Guards a criterion body so an exception becomes a FAIL line.
void criterion(int id, const std::string &title, const std::function<void(Outcome &)> &body) {
  if (!selected.empty() && !selected.count(id)) return;
  Outcome o;
  try {
    body(o);
  } catch (const std::exception &e) {
    o.check(false, fmt::format("exception: {}", e.what()));
  }
  report(id, title, o);
}

const KernelExpansion &coulomb() {
  static const KernelExpansion k = coulomb_reference_expansion();
  return k;
}

long double direct_sum(const KernelExpansion &k, long double r) {
  long double s = 0.0L;
  for (const auto &p : k.pairs) s += (long double)p.weight * std::exp(-(long double)p.exponent * r * r);
  return s;
}

bool within(double value, double reference, double tol) { return std::abs(value - reference) <= tol; }

bool in_band(double value, double reference) {
  return value >= 0.5 * reference && value <= 1.5 * reference;
}

struct MoleculeRun {
  ScfState state;
  EnergyBreakdown energy;
  double seconds = 0.0;
  std::size_t final_box_outside = 0;
};

// Global-group threshold used for both molecules. The published runs do not
// state theirs; 0.25 reproduces the published global-group size for HeH+.
constexpr double acceptance_sigma_far = 0.25;

ScfConfig acceptance_config() {
  ScfConfig cfg;
  cfg.grouping.sigma_far = acceptance_sigma_far;
  return cfg;
}

MoleculeRun run_preset(const std::string &preset, const MoleculeSpec &mol) {
  ScfConfig cfg = acceptance_config();
  cfg.on_iteration = [&](const IterationRecord &rec) {
    std::string line = fmt::format("  {} iter {}", preset, rec.iteration);
    for (double e : rec.energies) line += fmt::format(" {:.10f}", e);
    for (auto t : rec.orbital_terms) line += fmt::format(" {}", t);
    std::cout << line << fmt::format(" {:.1f}s", rec.elapsed_s) << std::endl;
  };
  MoleculeRun r;
  const auto t0 = Clock::now();
  r.state = run(mol, cfg, initialize(mol, preset, coulomb(), cfg), coulomb());
  r.energy = total_energy(r.state, mol, coulomb(), cfg);
  r.seconds = seconds_since(t0);
  r.final_box_outside = count_outside_box(r.state.orbitals.atoms, mol);
  return r;
}

void check_stats(Outcome &o, const std::string &label, const GroupStatistics &s, double global,
                 double groups, double nmax, double nmin, double nave) {
  auto one = [&](const char *name, double value, double ref) {
    o.check(in_band(value, ref), fmt::format("{} {} = {} (reference {}, band +-50%)", label, name,
                                             value, ref));
  };
  one("N_global", static_cast<double>(s.n_global), global);
  one("N_groups", static_cast<double>(s.n_groups), groups);
  one("N_max", static_cast<double>(s.n_max), nmax);
  one("N_min", static_cast<double>(s.n_min), nmin);
  one("N_ave", s.n_ave, nave);
}

} // namespace

int main(int argc, char **argv) {
  std::cout.setf(std::ios::unitbuf);
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc)
      known_failures.insert(std::atoi(argv[++i]));
    else
      selected.insert(std::atoi(arg.c_str()));
  }

  criterion(1, "Coulomb expansion certified to 1e-10 relative on [1e-7, 1e5]", [](Outcome &o) {
    // Construction includes the library's own certification pass.
    const auto t0 = Clock::now();
    const auto k = coulomb_reference_expansion();
    const double dt = seconds_since(t0);
    long double worst = 0.0L;
    for (double r : log_spaced(1e-7, 1e5, 10000))
      worst = std::max(worst, std::abs(direct_sum(k, r) * r - 1.0L));
    o.check(k.size() == 147, fmt::format("{} terms", k.size()));
    o.check(worst <= 1e-10L, fmt::format("max relative error {:.3e}", (double)worst));
    o.check(dt < 1.0, fmt::format("runtime {:.3f} s", dt));
  });

  criterion(2, "Helmholtz expansions certified to 1e-10 / r", [](Outcome &o) {
    double dt = 0.0;
    for (double mu : {0.5, 1.0, 1.822, 2.214}) {
      const auto t0 = Clock::now();
      const auto g = helmholtz_expansion(mu);
      dt += seconds_since(t0);
      long double worst = 0.0L;
      for (double r : log_spaced(1e-7, 1e5, 10000)) {
        const long double exact = std::exp(-(long double)mu * r) / (4.0L * oracle::pi * r);
        worst = std::max(worst, std::abs(direct_sum(g, r) - exact) * r);
      }
      o.check(worst <= 1e-10L, fmt::format("mu {}: max r*|G - approx| {:.3e}", mu, (double)worst));
    }
    o.check(dt < 1.0, fmt::format("runtime {:.3f} s for all four", dt));
  });

  MoleculeRun heh, lih;
  bool heh_ok = false, lih_ok = false;
  const auto heh_mol = heh_cation();
  const auto lih_mol = lithium_hydride();

  criterion(3, "HeH+ reproduction", [&](Outcome &o) {
    heh = run_preset("heh+", heh_mol);
    heh_ok = true;
    const auto &s = heh.state;
    o.check(s.converged && s.iteration <= 40,
            fmt::format("converged={} after {} iterations (limit 40)", s.converged, s.iteration));
    o.check(within(heh.energy.orbital_energies[0], -1.66053903, 2e-4),
            fmt::format("E = {:.8f} (reference -1.66053903)", heh.energy.orbital_energies[0]));
    o.check(within(heh.energy.total, -2.93256741, 2e-4),
            fmt::format("E_tot = {:.8f} (reference -2.93256741)", heh.energy.total));
    o.check(s.orbitals.size() <= 5000, fmt::format("terms {}", s.orbitals.size()));
    o.check(heh.seconds <= 15 * 60, fmt::format("runtime {:.1f} s", heh.seconds));

    // One more step from the converged state should stay put.
    const ScfConfig cfg = acceptance_config();
    const auto next = scf_step(s, heh_mol, coulomb(), cfg);
    o.notes.push_back(fmt::format("  [info] extra step changes E by {:.2e}",
                                  std::abs(next.energies[0] - s.energies[0])));
  });

  criterion(4, "LiH reproduction", [&](Outcome &o) {
    lih = run_preset("lih", lih_mol);
    lih_ok = true;
    const auto &s = lih.state;
    const auto &e = lih.energy;
    o.check(s.converged && s.iteration <= 50,
            fmt::format("converged={} after {} iterations (limit 50)", s.converged, s.iteration));
    o.check(within(e.orbital_energies[0], -2.451763, 2e-4),
            fmt::format("E_1 = {:.8f} (reference -2.451763)", e.orbital_energies[0]));
    o.check(within(e.orbital_energies[1], -0.297823, 2e-4),
            fmt::format("E_2 = {:.8f} (reference -0.297823)", e.orbital_energies[1]));
    o.check(within(e.total, -7.9869364, 2e-4),
            fmt::format("E_tot = {:.8f} (reference -7.9869364)", e.total));
    const auto terms = s.history.back().orbital_terms;
    for (std::size_t j = 0; j < terms.size(); ++j)
      o.check(terms[j] <= 8000, fmt::format("orbital {} terms {}", j + 1, terms[j]));
    o.check(lih.seconds <= 90 * 60, fmt::format("runtime {:.1f} s", lih.seconds));

    const ScfConfig cfg = acceptance_config();
    const ReductionPlan plan{&lih_mol, cfg.effective_grouping(), true, cfg.drop_threshold, nullptr};
    const auto v = total_potential_apply(s.orbitals, lih_mol, coulomb(), plan);
    const auto h = fock_matrix(s.orbitals, v);
    o.notes.push_back(fmt::format("  [info] |H_12| on the final orbitals {:.2e}", std::abs(h(0, 1))));
  });

  criterion(5, "hydrogen atom without electron interaction", [](Outcome &o) {
    MoleculeSpec mol;
    mol.nuclei = {{-1.0, Vec3(0, 0, 0)}};
    mol.n_orbitals = 1;
    ScfConfig cfg;
    cfg.electron_interaction = false;
    const std::vector<GaussianMixture> guess{GaussianMixture{{{1.0, Vec3(0, 0, 0), 1.0}}}};
    const auto s = run(mol, cfg, initialize(mol, guess, coulomb(), cfg), coulomb());
    const auto e = total_energy(s, mol, coulomb(), cfg);
    o.check(s.converged, fmt::format("converged={} after {} iterations", s.converged, s.iteration));
    o.check(within(e.total, -0.5, 1e-4), fmt::format("E_tot = {:.10f}", e.total));
  });

  criterion(6, "reduction property suite", [](Outcome &o) {
    std::mt19937_64 rng(2024);
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      double worst = 0.0, worst_idem = 0.0;
      std::size_t subset_fail = 0, size_fail = 0, idem_size_fail = 0;
      std::uniform_int_distribution<int> count(2, 60);
      std::uniform_real_distribution<double> box(0.5, 3.0);
      for (int trial = 0; trial < 1000; ++trial) {
        const auto m = oracle::random_mixture(rng, static_cast<std::size_t>(count(rng)), box(rng), 0.05, 3.0);
        const auto r = reduce_group(m, eps);
        worst = std::max(worst, (double)(oracle::distance(m, r) / oracle::norm(m)));
        if (r.size() > m.size()) ++size_fail;
        std::set<std::tuple<double, double, double, double>> atoms;
        for (const auto &t : m.terms) atoms.insert({t.center.x(), t.center.y(), t.center.z(), t.sigma});
        for (const auto &t : r.terms)
          if (!atoms.count({t.center.x(), t.center.y(), t.center.z(), t.sigma})) ++subset_fail;
        if (trial % 10 == 0) {
          const auto r2 = reduce_group(r, eps);
          if (r2.size() != r.size()) ++idem_size_fail;
          worst_idem = std::max(worst_idem, (double)(oracle::distance(r, r2) / oracle::norm(r)));
        }
      }
      o.check(worst <= eps, fmt::format("eps {:.0e}: worst relative error {:.3e} over 1000 mixtures", eps, worst));
      o.check(subset_fail == 0 && size_fail == 0,
              fmt::format("eps {:.0e}: skeleton-subset violations {}, size violations {}", eps,
                          subset_fail, size_fail));
      o.check(idem_size_fail == 0 && worst_idem <= eps,
              fmt::format("eps {:.0e}: idempotence term-count changes {}, worst change {:.3e}", eps,
                          idem_size_fail, worst_idem));

      const auto base = oracle::random_mixture(rng, 20, 3.0, 0.2, 2.0);
      std::uniform_real_distribution<double> c(-1, 1);
      GaussianMixture dup;
      for (int rep = 0; rep < 10; ++rep)
        for (const auto &t : base.terms) dup.terms.push_back({c(rng), t.center, t.sigma});
      const auto rd = reduce_group(dup, eps);
      o.check(rd.size() == 20, fmt::format("eps {:.0e}: 200 duplicated terms -> {}", eps, rd.size()));
    }
  });

  criterion(7, "term centers stay inside the nuclear bounding box", [&](Outcome &o) {
    if (!heh_ok || !lih_ok) {
      o.check(false, "molecule runs did not complete");
      return;
    }
    for (const auto *r : {&heh, &lih}) {
      const char *name = r == &heh ? "HeH+" : "LiH";
      o.check(r->state.box_violations == 0 && r->final_box_outside == 0,
              fmt::format("{}: {} violations among {} checked centers", name,
                          r->state.box_violations + r->final_box_outside, r->state.centers_checked));
      o.check(r->state.centers_checked > 0, fmt::format("{}: centers were checked", name));
    }
  });

  criterion(8, "group keys and group statistics", [&](Outcome &o) {
    const GroupingConfig cfg;
    const auto keys = enumerate_group_keys(2, cfg);
    o.check(keys.size() == 107, fmt::format("{} possible group keys", keys.size()));
    if (!heh_ok || !lih_ok) {
      o.check(false, "molecule runs did not complete");
      return;
    }
    const auto &h = heh.state.history.back();
    check_stats(o, "HeH+ phi", h.orbital_stats[0], 137, 28, 69, 2, 50.9);
    check_stats(o, "HeH+ Vtot phi", h.vtot_stats[0], 137, 70, 70, 4, 32.8);
    const auto &l = lih.state.history.back();
    check_stats(o, "LiH phi_1", l.orbital_stats[0], 218, 26, 108, 1, 75.7);
    check_stats(o, "LiH phi_2", l.orbital_stats[1], 217, 31, 107, 1, 75.9);
    check_stats(o, "LiH Vtot phi_1", l.vtot_stats[0], 220, 68, 107, 3, 43.0);
    check_stats(o, "LiH Vtot phi_2", l.vtot_stats[1], 215, 69, 107, 4, 46.2);
  });

  criterion(9, "closed forms against quadrature", [](Outcome &o) {
    std::mt19937_64 rng(99);
    double w_overlap = 0, w_kinetic = 0, w_product = 0, w_conv = 0;
    std::uniform_real_distribution<double> pos(-1.5, 1.5), leta(std::log(0.05), std::log(20.0));
    for (int i = 0; i < 50; ++i) {
      const auto a = oracle::random_term(rng, 1.5, 0.1, 3.0);
      const auto b = oracle::random_term(rng, 1.5, 0.1, 3.0);
      const double so = overlap(a.atom(), b.atom());
      const double qo = oracle::overlap(a.center, a.sigma, b.center, b.sigma);
      w_overlap = std::max(w_overlap, std::abs(so - qo) / std::abs(qo));
      const double sk = kinetic(a.atom(), b.atom());
      const double qk = oracle::kinetic(a.center, a.sigma, b.center, b.sigma);
      w_kinetic = std::max(w_kinetic, std::abs(sk - qk) / std::abs(qk));

      const auto p = product(a, b);
      const Vec3 x(pos(rng), pos(rng), pos(rng));
      const double exact = a.coeff * b.coeff * oracle::atom(x, a.center, a.sigma) *
                           oracle::atom(x, b.center, b.sigma);
      const double approx = p.coeff * oracle::atom(x, p.center, p.sigma);
      // Relative to the size of the product near its peak, so that points in
      // the far tail do not divide by a vanishing value.
      const double scale = std::abs(p.coeff) * oracle::atom(p.center, p.center, p.sigma);
      double pointwise = std::abs(approx - exact) / scale;
      // Total mass of the product by quadrature of the defining factors.
      double mass = a.coeff * b.coeff;
      for (int k = 0; k < 3; ++k)
        mass *= oracle::integrate(
            [&](double t) { return oracle::factor1d(t, a.center[k], a.sigma) * oracle::factor1d(t, b.center[k], b.sigma); },
            -40.0, 40.0);
      const double pmass = p.coeff * oracle::atom_integral(p.center, p.sigma);
      w_product = std::max({w_product, pointwise, std::abs(pmass - mass) / std::abs(mass)});

      const double eta = std::exp(leta(rng)), w = 0.7;
      const auto conv = convolve_with_radial_gaussian(a, w, eta);
      const double sc = conv.coeff * oracle::atom(x, conv.center, conv.sigma);
      const double qc = a.coeff * oracle::convolution(a.center, a.sigma, w, eta, x);
      const double cscale = std::abs(conv.coeff) * oracle::atom(conv.center, conv.center, conv.sigma);
      w_conv = std::max(w_conv, std::abs(sc - qc) / cscale);
    }
    o.check(w_overlap <= 1e-9, fmt::format("overlap worst relative error {:.3e}", w_overlap));
    o.check(w_kinetic <= 1e-9, fmt::format("kinetic worst relative error {:.3e}", w_kinetic));
    o.check(w_product <= 1e-9, fmt::format("product worst relative error {:.3e}", w_product));
    o.check(w_conv <= 1e-9, fmt::format("convolution worst relative error {:.3e}", w_conv));
  });

  int failed = 0;
  std::cout << "\nsummary\n";
  for (const auto &[id, o] : results) {
    const bool known = !o.pass && known_failures.count(id);
    std::cout << fmt::format("criterion {}: {}{}\n", id, o.pass ? "PASS" : "FAIL",
                             known ? " (known failure)" : "");
    if (!o.pass && !known) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
