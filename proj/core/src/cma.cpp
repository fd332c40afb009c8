#include "flowforge/cma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flowforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double& at(std::vector<double>& m, std::size_t n, std::size_t r, std::size_t c) {
  return m[r * n + c];
}
double at(const std::vector<double>& m, std::size_t n, std::size_t r, std::size_t c) {
  return m[r * n + c];
}

}  // namespace

void sym_eigen(const std::vector<double>& matrix, std::size_t n, std::vector<double>& eigenvalues,
               std::vector<double>& eigenvectors_colmajor) {
  std::vector<double> a = matrix;
  std::vector<double>& v = eigenvectors_colmajor;
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) at(v, n, i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, n, p, q) * at(a, n, p, q);
    if (off < 1e-24) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, n, p, q);
        if (apq == 0.0) continue;
        const double app = at(a, n, p, p);
        const double aqq = at(a, n, q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, n, k, p);
          const double akq = at(a, n, k, q);
          at(a, n, k, p) = c * akp - s * akq;
          at(a, n, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, n, p, k);
          const double aqk = at(a, n, q, k);
          at(a, n, p, k) = c * apk - s * aqk;
          at(a, n, q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, n, k, p);
          const double vkq = at(v, n, k, q);
          at(v, n, k, p) = c * vkp - s * vkq;
          at(v, n, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  double max_ev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    eigenvalues[i] = at(a, n, i, i);
    max_ev = std::max(max_ev, std::abs(eigenvalues[i]));
  }
  // numerical repair: keep the spectrum strictly positive
  const double floor_ev = std::max(1e-14 * max_ev, 1e-300);
  for (double& ev : eigenvalues) ev = std::max(ev, floor_ev);
}

CmaState cma_init(std::size_t dim, std::vector<double> mean0, double sigma0,
                  std::size_t population) {
  if (dim < 1) throw InvalidConfigError("cma_init: dimension must be >= 1");
  if (!(sigma0 > 0.0)) throw InvalidConfigError("cma_init: sigma0 must be > 0");
  if (population < 2) throw InvalidConfigError("cma_init: population must be >= 2");
  if (mean0.size() != dim) throw InvalidConfigError("cma_init: mean has wrong dimension");

  CmaState s;
  s.dim = dim;
  s.population = population;
  s.mean = std::move(mean0);
  s.sigma = sigma0;
  s.C.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) at(s.C, dim, i, i) = 1.0;
  s.p_sigma.assign(dim, 0.0);
  s.p_c.assign(dim, 0.0);

  s.mu = population / 2;
  s.weights.resize(s.mu);
  double wsum = 0.0;
  for (std::size_t i = 0; i < s.mu; ++i) {
    s.weights[i] = std::log((population + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
    wsum += s.weights[i];
  }
  double w2 = 0.0;
  for (double& w : s.weights) {
    w /= wsum;
    w2 += w * w;
  }
  s.mu_eff = 1.0 / w2;

  const double d = static_cast<double>(dim);
  s.c_sigma = (s.mu_eff + 2.0) / (d + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (d + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / d) / (d + 4.0 + 2.0 * s.mu_eff / d);
  s.c1 = 2.0 / ((d + 1.3) * (d + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                    ((d + 2.0) * (d + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  return s;
}

std::vector<CmaCandidate> cma_ask(const CmaState& state, const SeedPath& seed) {
  const std::size_t n = state.dim;
  std::vector<double> eigvals, basis;
  sym_eigen(state.C, n, eigvals, basis);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = std::sqrt(eigvals[i]);

  RandomStream rng = seed.stream();
  std::vector<CmaCandidate> out(state.population);
  for (std::size_t j = 0; j < state.population; ++j) {
    CmaCandidate& cand = out[j];
    cand.id = j;
    cand.x.resize(n);
    std::vector<double> z(n);
    for (double& zi : z) zi = rng.normal();
    for (std::size_t r = 0; r < n; ++r) {
      double y = 0.0;
      for (std::size_t c = 0; c < n; ++c) y += at(basis, n, r, c) * sq[c] * z[c];
      cand.x[r] = std::clamp(state.mean[r] + state.sigma * y, 0.0, 1.0);
    }
    cand.score = kInf;
  }
  return out;
}

CmaState cma_tell(const CmaState& state, const std::vector<CmaCandidate>& scored) {
  const std::size_t n = state.dim;
  const std::size_t lambda = state.population;
  if (scored.size() != lambda)
    throw InvalidConfigError("cma_tell: expected " + std::to_string(lambda) + " candidates");
  for (const CmaCandidate& c : scored) {
    if (c.x.size() != n) throw InvalidConfigError("cma_tell: candidate dimension mismatch");
  }

  // rank by (score, id); NaN counts as failure
  std::vector<std::size_t> order(lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto effective = [&scored](std::size_t i) {
    const double s = scored[i].score;
    return std::isnan(s) ? kInf : s;
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = effective(a), sb = effective(b);
    if (sa != sb) return sa < sb;
    return scored[a].id < scored[b].id;
  });
  if (effective(order[0]) == kInf)
    throw AllCandidatesFailedError("every candidate of the generation scored +inf");

  // base log-rank weights, averaged across exact-score ties so the update is
  // invariant under any strictly monotone score transform
  std::vector<double> w(lambda, 0.0);
  for (std::size_t r = 0; r < state.mu; ++r) w[r] = state.weights[r];
  std::size_t g0 = 0;
  while (g0 < lambda) {
    std::size_t g1 = g0 + 1;
    while (g1 < lambda && effective(order[g1]) == effective(order[g0])) ++g1;
    if (g1 - g0 > 1) {
      double avg = 0.0;
      for (std::size_t r = g0; r < g1; ++r) avg += w[r];
      avg /= static_cast<double>(g1 - g0);
      for (std::size_t r = g0; r < g1; ++r) w[r] = avg;
    }
    g0 = g1;
  }

  CmaState next = state;
  next.generation = state.generation + 1;

  // weighted recombination of the ranked candidates
  std::vector<double> new_mean(n, 0.0);
  for (std::size_t r = 0; r < lambda; ++r) {
    if (w[r] == 0.0) continue;
    const CmaCandidate& cand = scored[order[r]];
    for (std::size_t i = 0; i < n; ++i) new_mean[i] += w[r] * cand.x[i];
  }

  std::vector<double> y_w(n);
  for (std::size_t i = 0; i < n; ++i) y_w[i] = (new_mean[i] - state.mean[i]) / state.sigma;

  // p_sigma update needs C^(-1/2) y_w
  std::vector<double> eigvals, basis;
  sym_eigen(state.C, n, eigvals, basis);
  std::vector<double> tmp(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double proj = 0.0;
    for (std::size_t r = 0; r < n; ++r) proj += at(basis, n, r, c) * y_w[r];
    tmp[c] = proj / std::sqrt(eigvals[c]);
  }
  std::vector<double> c_inv_sqrt_yw(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += at(basis, n, r, c) * tmp[c];
    c_inv_sqrt_yw[r] = acc;
  }

  const double cs = state.c_sigma;
  double ps_norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    next.p_sigma[i] = (1.0 - cs) * state.p_sigma[i] +
                      std::sqrt(cs * (2.0 - cs) * state.mu_eff) * c_inv_sqrt_yw[i];
    ps_norm2 += next.p_sigma[i] * next.p_sigma[i];
  }
  const double ps_norm = std::sqrt(ps_norm2);

  const double gen1 = static_cast<double>(state.generation + 1);
  const double denom = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * gen1));
  const bool h_sigma =
      ps_norm / denom < (1.4 + 2.0 / (static_cast<double>(n) + 1.0)) * state.chi_n;

  const double cc = state.c_c;
  for (std::size_t i = 0; i < n; ++i) {
    next.p_c[i] = (1.0 - cc) * state.p_c[i] +
                  (h_sigma ? std::sqrt(cc * (2.0 - cc) * state.mu_eff) * y_w[i] : 0.0);
  }

  // covariance: rank-one from p_c plus rank-mu from the ranked steps
  const double c1 = state.c1;
  const double cmu = state.c_mu;
  const double decay = 1.0 - c1 - cmu;
  std::vector<double> newC(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double val = decay * at(state.C, n, r, c) + c1 * next.p_c[r] * next.p_c[c];
      if (!h_sigma) val += c1 * cc * (2.0 - cc) * at(state.C, n, r, c);
      at(newC, n, r, c) = val;
    }
  }
  std::vector<double> y(n);
  for (std::size_t rank = 0; rank < lambda; ++rank) {
    if (w[rank] == 0.0) continue;
    const CmaCandidate& cand = scored[order[rank]];
    for (std::size_t i = 0; i < n; ++i) y[i] = (cand.x[i] - state.mean[i]) / state.sigma;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) at(newC, n, r, c) += cmu * w[rank] * y[r] * y[c];
    }
  }
  // re-symmetrize against drift
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      const double v = 0.5 * (at(newC, n, r, c) + at(newC, n, c, r));
      at(newC, n, r, c) = v;
      at(newC, n, c, r) = v;
    }
  }
  next.C = std::move(newC);
  next.mean = std::move(new_mean);

  const double exponent = std::min(1.0, (cs / state.d_sigma) * (ps_norm / state.chi_n - 1.0));
  next.sigma = state.sigma * std::exp(exponent);
  return next;
}

}  // namespace flowforge
