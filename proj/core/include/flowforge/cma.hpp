#pragma once

#include <cstdint>
#include <vector>

#include "flowforge/rng.hpp"

namespace flowforge {

// (mu/mu_w, lambda)-CMA-ES over the unit box. The state is a value: ask is
// const, tell returns the successor, so shuffling candidate completion order
// cannot change anything.
struct CmaState {
  std::size_t dim = 0;
  std::size_t population = 0;
  std::vector<double> mean;
  double sigma = 0.3;
  std::vector<double> C;        // dim x dim covariance, row-major, symmetric
  std::vector<double> p_sigma;  // step-size evolution path
  std::vector<double> p_c;      // covariance evolution path
  std::uint64_t generation = 0;

  // recombination constants, fixed at init
  std::size_t mu = 0;
  std::vector<double> weights;  // mu positive log-rank weights, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;
};

struct CmaCandidate {
  std::size_t id = 0;     // position in the ask order; stable tie-break key
  std::vector<double> x;  // coordinates, clamped to [0,1]
  double score = 0.0;     // lower is better; +inf marks a failed evaluation
};

// C = identity, paths zero, standard log-rank weights over the top half.
// Throws InvalidConfigError on dim < 1, sigma0 <= 0, population < 2 or a
// mean of the wrong length.
CmaState cma_init(std::size_t dim, std::vector<double> mean0, double sigma0,
                  std::size_t population);

// population candidates ~ mean + sigma * N(0, C), clamped per coordinate.
// Pure function of (state, seed).
std::vector<CmaCandidate> cma_ask(const CmaState& state, const SeedPath& seed);

// Standard mean/step/covariance update from the score ranking. Candidates
// with equal scores share tie-averaged weights, so any strictly monotone
// score transform yields a bit-identical successor state. Throws
// AllCandidatesFailedError when every score is +inf.
CmaState cma_tell(const CmaState& state, const std::vector<CmaCandidate>& scored);

// Symmetric eigendecomposition (cyclic Jacobi) used by ask/tell; exposed for
// tests. Eigenvalues are floored at a tiny positive value.
void sym_eigen(const std::vector<double>& matrix, std::size_t n, std::vector<double>& eigenvalues,
               std::vector<double>& eigenvectors_colmajor);

}  // namespace flowforge
