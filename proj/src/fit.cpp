#include "isophase/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "isophase/detail/linalg.hpp"
#include "isophase/detail/parallel.hpp"
#include "isophase/errors.hpp"
#include "isophase/scattering.hpp"

namespace isophase {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kRssRelTol = 1e-12;
constexpr double kGradTol = 1e-10;

struct WorkingSet {
  std::vector<double> k;       // fm^-1
  std::vector<double> delta;   // degrees
  std::vector<double> sqrt_w;
};

WorkingSet working_set(const PhaseShiftDataset& data, const Constants& c) {
  WorkingSet ws;
  ws.k.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    ws.k.push_back(k_from_elab(row.e_lab, c).k);
    ws.delta.push_back(row.delta_deg);
    ws.sqrt_w.push_back(std::sqrt(row.weight));
  }
  return ws;
}

// parameters: theta = (a_1..a_n, log b_1..log b_n)
struct Params {
  std::vector<double> theta;
  int n;

  PoleSet poles() const {
    PoleSet ps;
    for (int j = 0; j < n; ++j) ps.a.push_back(theta[(std::size_t)j]);
    for (int j = 0; j < n; ++j) ps.b.push_back(std::exp(theta[(std::size_t)(n + j)]));
    return ps;
  }
};

double rss_of(const Params& p, const WorkingSet& ws, std::vector<double>* residuals) {
  const PoleSet ps = p.poles();
  double rss = 0.0;
  if (residuals) residuals->resize(ws.k.size());
  for (std::size_t i = 0; i < ws.k.size(); ++i) {
    const double r = fit_model_delta_deg(ps, ws.k[i]) - ws.delta[i];
    if (residuals) (*residuals)[i] = r;
    const double wr = ws.sqrt_w[i] * r;
    rss += wr * wr;
  }
  return rss;
}

struct LocalFit {
  Params params;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

LocalFit levenberg_marquardt(Params p, const WorkingSet& ws, int max_iterations) {
  const int np = (int)p.theta.size();
  const std::size_t m = ws.k.size();
  std::vector<double> resid;
  double rss = rss_of(p, ws, &resid);
  double lambda = 1e-3;

  LocalFit out;
  std::vector<double> jrow((std::size_t)np);
  std::vector<long double> jtj((std::size_t)(np * np)), grad((std::size_t)np);

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const PoleSet ps = p.poles();
    std::fill(jtj.begin(), jtj.end(), 0.0L);
    std::fill(grad.begin(), grad.end(), 0.0L);
    for (std::size_t i = 0; i < m; ++i) {
      fit_model_jacobian(ps, ws.k[i], jrow);
      // chain rule for the log-parameterized b block
      for (int j = 0; j < p.n; ++j) jrow[(std::size_t)(p.n + j)] *= ps.b[(std::size_t)j];
      const double w = ws.sqrt_w[i] * ws.sqrt_w[i];
      for (int r = 0; r < np; ++r) {
        grad[(std::size_t)r] += w * jrow[(std::size_t)r] * resid[i];
        for (int c = r; c < np; ++c)
          jtj[(std::size_t)(r * np + c)] += w * jrow[(std::size_t)r] * jrow[(std::size_t)c];
      }
    }
    for (int r = 0; r < np; ++r)
      for (int c = 0; c < r; ++c) jtj[(std::size_t)(r * np + c)] = jtj[(std::size_t)(c * np + r)];

    double gmax = 0.0;
    for (int r = 0; r < np; ++r) gmax = std::max(gmax, std::abs((double)grad[(std::size_t)r]));
    if (gmax < kGradTol) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 25 && !stepped; ++attempt) {
      std::vector<long double> lhs = jtj;
      for (int r = 0; r < np; ++r) {
        const std::size_t d = (std::size_t)(r * np + r);
        lhs[d] += lambda * (jtj[d] > 0.0L ? jtj[d] : 1.0L);
      }
      std::vector<long double> step((std::size_t)np);
      for (int r = 0; r < np; ++r) step[(std::size_t)r] = -grad[(std::size_t)r];
      detail::SmallLU<long double> lu(std::move(lhs), (std::size_t)np);
      if (lu.exactly_singular()) {
        lambda *= 4.0;
        continue;
      }
      lu.solve(step);

      Params trial = p;
      for (int r = 0; r < np; ++r) trial.theta[(std::size_t)r] += (double)step[(std::size_t)r];
      // an a-pole through zero flips an arctan branch, and a pole escaping
      // to infinity silently drops out of the model; reject both
      bool bad = false;
      for (int j = 0; j < p.n; ++j) {
        const double a = trial.theta[(std::size_t)j];
        if (a == 0.0 || !std::isfinite(a) || std::abs(a) > 1e6) bad = true;
      }
      for (int j = p.n; j < np; ++j)
        if (std::abs(trial.theta[(std::size_t)j]) > 14.0) bad = true;  // b outside e^(+-14)
      double trial_rss = bad ? std::numeric_limits<double>::infinity()
                             : rss_of(trial, ws, nullptr);
      if (trial_rss < rss) {
        const double drop = rss - trial_rss;
        p = std::move(trial);
        rss = rss_of(p, ws, &resid);
        lambda = std::max(lambda / 3.0, 1e-14);
        stepped = true;
        if (drop < kRssRelTol * std::max(rss, 1e-30)) {
          out.converged = true;
          ++iter;
          goto done;
        }
      } else {
        lambda *= 4.0;
      }
    }
    if (!stepped) {
      // no step reduces rss even at the damping limit: the achievable rss
      // change is zero, which meets the relative-change criterion
      out.converged = true;
      break;
    }
  }
done:
  out.params = std::move(p);
  out.rss = rss;
  out.iterations = iter;
  return out;
}

bool pole_order_less(const PoleSet& x, const PoleSet& y) {
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

}  // namespace

void PhaseShiftDataset::check() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.e_lab) || !std::isfinite(r.delta_deg) || !(r.weight > 0.0))
      throw ValidationError("dataset: non-finite row or non-positive weight");
    if (i > 0 && !(r.e_lab > rows[i - 1].e_lab))
      throw ValidationError("dataset: E_lab must be strictly increasing");
  }
}

PhaseShiftDataset PhaseShiftDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PhaseShiftDataset data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',' || ch == '\t' || ch == ';') ch = ' ';
    std::istringstream ss(line);
    double e, d, w;
    if (!(ss >> e)) continue;  // blank or comment-only line
    if (!(ss >> d))
      throw IoError(path + ":" + std::to_string(lineno) + ": expected E_lab and delta columns");
    Row row{e, d, 1.0};
    if (ss >> w) row.weight = w;
    data.rows.push_back(row);
  }
  data.check();
  return data;
}

double fit_model_delta_deg(const PoleSet& poles, double k) {
  return phase_shift(poles, k) * kRadToDeg;
}

void fit_model_jacobian(const PoleSet& poles, double k, std::vector<double>& row) {
  row.resize(poles.a.size() + poles.b.size());
  std::size_t idx = 0;
  for (double a : poles.a) row[idx++] = kRadToDeg * k / (k * k + a * a);
  for (double b : poles.b) row[idx++] = kRadToDeg * k / (k * k + b * b);
}

FitResult fit_poles(const PhaseShiftDataset& data, int n, const FitOptions& options) {
  if (n < 0) throw std::invalid_argument("fit_poles: n must be non-negative");
  data.check();
  if ((int)data.rows.size() < 2 * n + 1)
    throw ValidationError("fit_poles: need at least 2n+1 rows for an n-pole fit");

  const WorkingSet ws = working_set(data, options.constants);

  FitResult best;
  best.n = n;
  if (n == 0) {
    double rss = 0.0;
    best.residuals.reserve(ws.k.size());
    for (std::size_t i = 0; i < ws.k.size(); ++i) {
      best.residuals.push_back(-ws.delta[i]);
      rss += ws.sqrt_w[i] * ws.sqrt_w[i] * ws.delta[i] * ws.delta[i];
    }
    best.rss = rss;
    best.converged = true;
    return best;
  }

  // Multi-start: every sign pattern of the a block crossed with seeded
  // log-uniform magnitude ladders, capped at max_starts.
  std::vector<Params> starts;
  for (const auto& seed : options.seeds) {
    if ((int)seed.a.size() != n || (int)seed.b.size() != n)
      throw std::invalid_argument("fit_poles: seed pole count mismatch");
    Params p{{}, n};
    for (double a : seed.a) p.theta.push_back(a);
    for (double b : seed.b) p.theta.push_back(std::log(b));
    starts.push_back(std::move(p));
  }
  const unsigned patterns = 1u << n;
  const int ladders = std::max(1, (options.max_starts + (int)patterns - 1) / (int)patterns);
  for (int l = 0; l < ladders && (int)starts.size() < options.max_starts; ++l) {
    for (unsigned mask = 0; mask < patterns && (int)starts.size() < options.max_starts; ++mask) {
      std::mt19937 rng(20250810u + 7919u * (unsigned)l + mask);
      std::uniform_real_distribution<double> logmag(std::log(options.seed_min),
                                                    std::log(options.seed_max));
      Params p{{}, n};
      for (int j = 0; j < n; ++j) {
        const double mag = std::exp(logmag(rng));
        p.theta.push_back(mask & (1u << j) ? -mag : mag);
      }
      for (int j = 0; j < n; ++j) p.theta.push_back(logmag(rng));
      starts.push_back(std::move(p));
    }
  }

  std::vector<LocalFit> fits(starts.size());
  detail::parallel_for(starts.size(), [&](std::size_t i) {
    fits[i] = levenberg_marquardt(starts[i], ws, options.max_iterations);
  });

  // deterministic reduction: minimal rss among converged fits, ties broken
  // by the sorted pole vectors
  const LocalFit* chosen = nullptr;
  for (const auto& f : fits) {
    if (!f.converged) continue;
    if (!chosen || f.rss < chosen->rss - 1e-15 ||
        (std::abs(f.rss - chosen->rss) <= 1e-15 &&
         pole_order_less(f.params.poles(), chosen->params.poles())))
      chosen = &f;
  }
  const bool any_converged = chosen != nullptr;
  if (!chosen)
    for (const auto& f : fits)
      if (!chosen || f.rss < chosen->rss) chosen = &f;

  // The phase model sees only the union of the poles, never the split of the
  // positive ones between the two blocks, so degenerate minima abound.
  // Canonical presentation: negatives sit in a; the a block then takes
  // positive poles at the even ranks from the top (second largest, fourth,
  // ...), interleaving each below a larger b partner.  That is the split
  // whose level-hosting configurations stay nodeless in practice.
  {
    const PoleSet raw = chosen->params.poles();
    std::vector<double> positives = raw.b;
    std::vector<double> negatives;
    for (double a : raw.a) (a > 0.0 ? positives : negatives).push_back(a);
    std::sort(positives.begin(), positives.end(), std::greater<>());

    const std::size_t want_a = (std::size_t)n - negatives.size();
    std::vector<bool> to_a(positives.size(), false);
    std::size_t taken = 0;
    for (std::size_t r = 1; r < positives.size() && taken < want_a; r += 2) {
      to_a[r] = true;  // ranks 2, 4, ... from the top
      ++taken;
    }
    for (std::size_t r = 0; r < positives.size() && taken < want_a; ++r)
      if (!to_a[r]) {
        to_a[r] = true;
        ++taken;
      }

    best.poles.a = std::move(negatives);
    for (std::size_t r = 0; r < positives.size(); ++r)
      (to_a[r] ? best.poles.a : best.poles.b).push_back(positives[r]);
    std::sort(best.poles.a.begin(), best.poles.a.end());
    std::sort(best.poles.b.begin(), best.poles.b.end());
  }
  best.iterations = chosen->iterations;
  best.converged = any_converged;
  best.starts_tried = (int)starts.size();

  Params sorted{{}, n};
  for (double a : best.poles.a) sorted.theta.push_back(a);
  for (double b : best.poles.b) sorted.theta.push_back(std::log(b));
  best.rss = rss_of(sorted, ws, &best.residuals);
  return best;
}

std::vector<FitResult> model_scan(const PhaseShiftDataset& data, int n_max,
                                  const FitOptions& options) {
  if (n_max < 1) throw std::invalid_argument("model_scan: n_max must be at least 1");
  data.check();
  if (data.rows.size() < 3)
    throw ValidationError("model_scan: insufficient data for even a single pole pair");
  std::vector<FitResult> out;
  for (int n = 1; n <= n_max; ++n) {
    FitOptions opts = options;
    if (!out.empty() && out.back().converged && out.back().n == n - 1 && n > 1) {
      // warm start: the previous minimum plus a nearly phase-invisible
      // (-q, q) pair, so rss can only improve with the order
      PoleSet seed = out.back().poles;
      seed.a.push_back(-1.3);
      seed.b.push_back(1.3 * 1.05);
      opts.seeds.push_back(std::move(seed));
    }
    try {
      out.push_back(fit_poles(data, n, opts));
    } catch (const std::exception&) {
      FitResult failed;
      failed.n = n;
      failed.rss = std::numeric_limits<double>::infinity();
      failed.converged = false;
      out.push_back(std::move(failed));
    }
  }
  return out;
}

}  // namespace isophase
