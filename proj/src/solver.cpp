#include "isophase/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isophase/detail/parallel.hpp"
#include "isophase/errors.hpp"
#include "isophase/potential.hpp"
#include "isophase/scattering.hpp"

namespace isophase {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRescaleLimit = 1e250;

double wrap_mod_pi(double delta) {
  // representative in (-pi/2, pi/2]
  double d = std::fmod(delta, kPi);
  if (d > kPi / 2.0) d -= kPi;
  if (d <= -kPi / 2.0) d += kPi;
  return d;
}

}  // namespace

SolverConfig SolverConfig::from_policy(const NumericPolicy& policy, int nu) {
  SolverConfig cfg;
  cfg.x_start = 10.0 * policy.grid_min;
  cfg.step = policy.grid_step;
  cfg.bisect_tol = policy.ode_tol;
  cfg.nu_origin = nu;
  return cfg;
}

RadialSolver::RadialSolver(std::function<double(double)> potential, SolverConfig cfg)
    : v_(std::move(potential)), cfg_(cfg) {
  if (!(cfg_.x_start > 0.0) || !(cfg_.step > 0.0) || !(cfg_.x_match > cfg_.x_start))
    throw std::invalid_argument("RadialSolver: bad geometry in config");
  // never reallocate: concurrent readers keep their already-ensured prefix
  v_cache_.reserve((std::size_t)((cfg_.x_match_max - cfg_.x_start) / cfg_.step) + 16);
}

void RadialSolver::ensure_cache(std::size_t last_node) const {
  std::scoped_lock lock(cache_mutex_);
  if (v_cache_.size() > last_node) return;
  if (last_node + 1 > v_cache_.capacity())
    throw std::invalid_argument("RadialSolver: requested radius beyond x_match_max");
  const std::size_t old = v_cache_.size();
  v_cache_.resize(last_node + 1);
  for (std::size_t i = old; i <= last_node; ++i)
    v_cache_[i] = v_(cfg_.x_start + (double)i * cfg_.step);
}

Wavefunction RadialSolver::integrate(double energy, double x_end) const {
  const double h = cfg_.step;
  const std::size_t n = (std::size_t)std::llround((x_end - cfg_.x_start) / h);
  if (n < 8) throw std::invalid_argument("RadialSolver::integrate: x_end too close to x_start");
  ensure_cache(n);

  Wavefunction wf;
  wf.x.resize(n + 1);
  wf.psi.resize(n + 1);
  const double c = h * h / 12.0;
  const int nu = cfg_.nu_origin;

  // two-term series startup psi = x^(nu+1) (1 + c1 x^2) with
  // c1 = (V_reg - E)/(4 nu + 6); the bare power law seeds an irregular
  // admixture that shifts extracted phases and levels noticeably
  const double v_reg = v_cache_[0] - nu * (nu + 1) / (cfg_.x_start * cfg_.x_start);
  const double c1 = (v_reg - energy) / (4.0 * nu + 6.0);
  auto series = [&](double x) { return std::pow(x, nu + 1) * (1.0 + c1 * x * x); };
  wf.x[0] = cfg_.x_start;
  wf.psi[0] = series(cfg_.x_start);
  wf.x[1] = cfg_.x_start + h;
  wf.psi[1] = series(cfg_.x_start + h);

  auto f_at = [&](std::size_t i) { return v_cache_[i] - energy; };
  for (std::size_t i = 1; i < n; ++i) {
    wf.x[i + 1] = cfg_.x_start + (double)(i + 1) * h;
    wf.psi[i + 1] = (2.0 * wf.psi[i] * (1.0 + 5.0 * c * f_at(i)) -
                     wf.psi[i - 1] * (1.0 - c * f_at(i - 1))) /
                    (1.0 - c * f_at(i + 1));
    if (std::abs(wf.psi[i + 1]) > kRescaleLimit) {
      const double s = std::abs(wf.psi[i + 1]);
      for (std::size_t j = 0; j <= i + 1; ++j) wf.psi[j] /= s;
      wf.log_scale += std::log(s);
    }
  }
  // one-sided five-point derivative at the final sample
  wf.dpsi_end = (25.0 * wf.psi[n] - 48.0 * wf.psi[n - 1] + 36.0 * wf.psi[n - 2] -
                 16.0 * wf.psi[n - 3] + 3.0 * wf.psi[n - 4]) /
                (12.0 * h);
  return wf;
}

double RadialSolver::raw_phase(double k, double x_end) const {
  const auto wf = integrate(k * k, x_end);
  const std::size_t n = wf.psi.size() - 1;
  const std::size_t j = n - 2;  // central 5-point derivative lives here
  const double dpsi =
      (wf.psi[j - 2] - 8.0 * wf.psi[j - 1] + 8.0 * wf.psi[j + 1] - wf.psi[j + 2]) /
      (12.0 * cfg_.step);
  // the transformed wave tends to sin(kx + delta) with delta exactly the
  // arctan sum of the pole formula; nu shows up only in the origin series
  return std::atan2(k * wf.psi[j], dpsi) - k * wf.x[j];
}

double RadialSolver::stabilized_phase(double k) const {
  double x = cfg_.x_match;
  double prev = wrap_mod_pi(raw_phase(k, x));
  while (true) {
    x *= 1.5;
    if (x > cfg_.x_match_max)
      throw NumericalError("extract_phase: potential tail too slow below x_match_max");
    const double cur = wrap_mod_pi(raw_phase(k, x));
    if (std::abs(wrap_mod_pi(cur - prev)) < cfg_.tol) return cur;
    prev = cur;
  }
}

std::vector<double> RadialSolver::phase_shifts(std::vector<double> ks) const {
  for (double k : ks)
    if (!(k > 0.0)) throw std::domain_error("phase_shifts: momenta must be positive");

  // march from low k, where |delta| < pi/2 holds, and keep the branch
  // continuous; filler points keep consecutive steps well inside half a turn
  const double k_max = *std::max_element(ks.begin(), ks.end());
  const double k_lo = std::min(0.01, *std::min_element(ks.begin(), ks.end()));
  std::vector<double> grid;
  for (double k = k_lo; k < k_max; k *= 1.25) grid.push_back(k);
  grid.insert(grid.end(), ks.begin(), ks.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             grid.end());

  std::vector<double> resolved(grid.size());
  double prev = 0.0;  // delta(0+) anchor
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double raw = stabilized_phase(grid[i]);
    resolved[i] = raw + kPi * std::round((prev - raw) / kPi);
    prev = resolved[i];
  }

  std::vector<double> out(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), ks[i] - 1e-14);
    out[i] = resolved[(std::size_t)(it - grid.begin())];
  }
  return out;
}

double RadialSolver::phase_shift(double k) const { return phase_shifts({k})[0]; }

RadialSolver::Mismatch RadialSolver::mismatch(double energy, std::size_t m_match,
                                              std::size_t m_far) const {
  const double h = cfg_.step;
  ensure_cache(m_far);

  // outward branch, two extra nodes for the derivative stencil
  const auto out = integrate(energy, cfg_.x_start + (double)(m_match + 2) * h);
  const std::size_t jo = m_match;
  const double psi_o = out.psi[jo];
  const double dpsi_o =
      (out.psi[jo - 2] - 8.0 * out.psi[jo - 1] + 8.0 * out.psi[jo + 1] - out.psi[jo + 2]) /
      (12.0 * h);
  int nodes = 0;
  for (std::size_t i = 1; i <= jo; ++i)
    if (out.psi[i - 1] != 0.0 && out.psi[i] * out.psi[i - 1] < 0.0) ++nodes;

  // inward branch seeded with the decaying exponential, walked down the same
  // grid so both branches sample identical abscissas
  const double kappa = std::sqrt(-energy);
  const std::size_t n_in = m_far - (m_match - 2);
  std::vector<double> psi(n_in + 1);
  const double c = h * h / 12.0;
  psi[0] = 1.0;
  psi[1] = std::exp(kappa * h);
  auto f_in = [&](std::size_t i) { return v_cache_[m_far - i] - energy; };
  for (std::size_t i = 1; i < n_in; ++i) {
    psi[i + 1] = (2.0 * psi[i] * (1.0 + 5.0 * c * f_in(i)) -
                  psi[i - 1] * (1.0 - c * f_in(i - 1))) /
                 (1.0 - c * f_in(i + 1));
    if (std::abs(psi[i + 1]) > kRescaleLimit) {
      const double s = std::abs(psi[i + 1]);
      for (std::size_t j = 0; j <= i + 1; ++j) psi[j] /= s;
    }
  }
  const std::size_t ji = n_in - 2;  // the matching node
  const double psi_i = psi[ji];
  const double dpsi_i =
      -(psi[ji - 2] - 8.0 * psi[ji - 1] + 8.0 * psi[ji + 1] - psi[ji + 2]) / (12.0 * h);

  Mismatch mm;
  const double norm = std::abs(psi_o * dpsi_i) + std::abs(dpsi_o * psi_i) + 1e-300;
  mm.wronskian = (psi_o * dpsi_i - dpsi_o * psi_i) / norm;
  mm.nodes = nodes;
  return mm;
}

std::vector<double> RadialSolver::bound_states(double e_min, double e_max) const {
  if (!(e_min < e_max) || e_max > 0.0)
    throw std::domain_error("bound_states: need a window e_min < e_max <= 0");
  const double e_hi = std::min(e_max, -1e-9);
  if (e_min >= e_hi) return {};

  const double h = cfg_.step;

  // match near the potential minimum, snapped onto the integration grid
  double x_m = 1.0, v_min = std::numeric_limits<double>::infinity();
  for (double x = std::max(cfg_.x_start + 30.0 * h, 0.05); x <= 12.0; x += 0.05) {
    const double v = v_(x);
    if (v < v_min) {
      v_min = v;
      x_m = x;
    }
  }
  const std::size_t m_match =
      (std::size_t)std::max<long long>(30, std::llround((x_m - cfg_.x_start) / h));

  auto m_far_of = [&](double e) {
    const double reach = std::min(std::max(10.0, 35.0 / std::sqrt(-e)), 80.0);
    return m_match + (std::size_t)std::llround(reach / h);
  };
  auto eval = [&](double e) { return mismatch(e, m_match, m_far_of(e)); };

  struct Node {
    double e;
    Mismatch mm;
  };
  const int n_scan = 240;
  std::vector<Node> scan(n_scan + 1);
  for (int i = 0; i <= n_scan; ++i) {
    const double e = e_min + (e_hi - e_min) * (double)i / n_scan;
    scan[(std::size_t)i] = {e, eval(e)};
  }

  std::vector<double> roots;
  auto bisect = [&](double lo, double hi, double wlo) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hi - lo < cfg_.bisect_tol * std::abs(mid) || hi - lo < 1e-13) {
        roots.push_back(mid);
        return;
      }
      const double wm = eval(mid).wronskian;
      if (wlo * wm <= 0.0)
        hi = mid;
      else {
        lo = mid;
        wlo = wm;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  };

  // sign changes seed bisections; a node-count jump without one means a
  // double crossing inside the cell, so subdivide
  std::function<void(Node, Node, int)> hunt = [&](Node a, Node b, int depth) {
    if (a.mm.wronskian * b.mm.wronskian < 0.0) {
      bisect(a.e, b.e, a.mm.wronskian);
      return;
    }
    if (a.mm.nodes == b.mm.nodes || depth >= 10) return;
    const Node mid{0.5 * (a.e + b.e), eval(0.5 * (a.e + b.e))};
    hunt(a, mid, depth + 1);
    hunt(mid, b, depth + 1);
  };
  for (int i = 0; i < n_scan; ++i) hunt(scan[(std::size_t)i], scan[(std::size_t)(i + 1)], 0);

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-7; }),
              roots.end());
  return roots;
}

// ---------------------------------------------------------------------------
// free functions
// ---------------------------------------------------------------------------

Wavefunction integrate_regular(const std::function<double(double)>& potential, double energy,
                               const SolverConfig& cfg) {
  return RadialSolver(potential, cfg).integrate(energy, cfg.x_match);
}

double extract_phase(const std::function<double(double)>& potential, double k,
                     const SolverConfig& cfg) {
  return RadialSolver(potential, cfg).phase_shift(k);
}

std::vector<double> bound_states(const std::function<double(double)>& potential, double e_min,
                                 double e_max, const SolverConfig& cfg) {
  return RadialSolver(potential, cfg).bound_states(e_min, e_max);
}

EquivalenceReport verify_phase_equivalence(const std::vector<ChainSpec>& chains,
                                           const std::vector<double>& energies_mev,
                                           double threshold_deg, const Constants& constants,
                                           const NumericPolicy& policy) {
  if (chains.empty()) throw std::invalid_argument("verify_phase_equivalence: no chains");
  if (energies_mev.empty()) throw std::invalid_argument("verify_phase_equivalence: no energies");

  const PoleSet base = chains.front().pole_set();
  for (const auto& chain : chains) {
    const PoleSet ps = chain.pole_set();
    const bool same = ps.a.size() == base.a.size() && ps.b.size() == base.b.size() &&
                      std::equal(ps.a.begin(), ps.a.end(), base.a.begin(),
                                 [](double x, double y) { return std::abs(x - y) < 1e-12; }) &&
                      std::equal(ps.b.begin(), ps.b.end(), base.b.begin(),
                                 [](double x, double y) { return std::abs(x - y) < 1e-12; });
    if (!same)
      throw ValidationError("verify_phase_equivalence: chains share no common pole set");
  }

  EquivalenceReport rep;
  rep.energies_mev = energies_mev;
  rep.threshold_deg = threshold_deg;

  std::vector<double> ks;
  for (double e : energies_mev) ks.push_back(k_from_elab(e, constants).k);

  const double rad2deg = 180.0 / kPi;
  for (double k : ks) rep.analytic_deg.push_back(phase_shift(base, k) * rad2deg);

  rep.phases_deg.resize(chains.size());
  rep.chain_labels.resize(chains.size());
  std::vector<std::exception_ptr> errors(chains.size());
  detail::parallel_for(chains.size(), [&](std::size_t i) {
    try {
      ChainPotential pot(chains[i], policy);
      assert_nodeless(pot);
      SolverConfig cfg = SolverConfig::from_policy(policy, pot.nu());
      RadialSolver solver([&pot](double x) { return pot(x); }, cfg);
      const auto deltas = solver.phase_shifts(ks);
      rep.phases_deg[i].resize(ks.size());
      for (std::size_t j = 0; j < ks.size(); ++j) rep.phases_deg[i][j] = deltas[j] * rad2deg;
      rep.chain_labels[i] = "nu=" + std::to_string(pot.nu()) +
                            " levels=" + std::to_string((int)pot.bound_states().size()) + " [" +
                            chains[i].digest().substr(0, 8) + "]";
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  rep.max_pair_dev.assign(chains.size(), std::vector<double>(chains.size(), 0.0));
  for (std::size_t i = 0; i < chains.size(); ++i) {
    for (std::size_t j = 0; j < chains.size(); ++j) {
      double dev = 0.0;
      for (std::size_t e = 0; e < ks.size(); ++e)
        dev = std::max(dev, std::abs(rep.phases_deg[i][e] - rep.phases_deg[j][e]));
      rep.max_pair_dev[i][j] = dev;
      rep.max_deviation_deg = std::max(rep.max_deviation_deg, dev);
    }
    for (std::size_t e = 0; e < ks.size(); ++e)
      rep.max_deviation_deg = std::max(
          rep.max_deviation_deg, std::abs(rep.phases_deg[i][e] - rep.analytic_deg[e]));
  }
  rep.pass = rep.max_deviation_deg < threshold_deg;
  return rep;
}

}  // namespace isophase
