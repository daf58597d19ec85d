#pragma once

// Double-precision reference pipeline and blind-source-separation test
// signal generator.

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "icaprep/fixed_point.hpp"
#include "icaprep/matrix.hpp"
#include "icaprep/prep.hpp"

namespace icaprep {

using cdouble = std::complex<double>;
using FloatMatrix = Matrix<cdouble>;

FloatMatrix float_identity(std::size_t n);
FloatMatrix matmul(const FloatMatrix& a, const FloatMatrix& b);
FloatMatrix adjoint(const FloatMatrix& a);
double max_abs_diff(const FloatMatrix& a, const FloatMatrix& b);
double frobenius(const FloatMatrix& a);

FloatMatrix to_float(const CFixMatrix& m);
FloatMatrix to_float(const HermitianMatrix& m);
// Quantizes each component with round-to-nearest-even and saturation.
SignalMatrix quantize_signals(const FloatMatrix& y, FixFormat fmt);

FloatMatrix oracle_center(const FloatMatrix& y);
// (1/M) Ybar Ybar^H, symmetrized.
FloatMatrix oracle_cov(const FloatMatrix& y_bar);

struct OracleEvd {
  std::vector<double> eigenvalues;  // diagonal order
  FloatMatrix eigenvectors;         // columns
  // Off-diagonal Frobenius norm before the first sweep and after each sweep.
  std::vector<double> off_norm_trace;
  int sweeps = 0;
};

// Row-cyclic complex Jacobi. Converged when the off-norm drops below
// tol·max(1, ||A||_F); throws ConvergenceError after max_sweeps.
OracleEvd oracle_evd(const FloatMatrix& a, int max_sweeps = 50, double tol = 1e-12);

// D^(-1/2) E^H Ybar. Throws RankDeficiencyError if an eigenvalue is below
// floor_rel · max eigenvalue.
FloatMatrix oracle_whiten(const FloatMatrix& y_bar, const std::vector<double>& eigenvalues,
                          const FloatMatrix& eigenvectors, double floor_rel = 1e-8);

// D^(-1/2) E^H as a matrix.
FloatMatrix whitening_matrix(const std::vector<double>& eigenvalues, const FloatMatrix& eigenvectors,
                             double floor_rel = 1e-8);

enum class ScenarioKind { QpskSources, GaussianMixCheck, TwoTone };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);  // throws ConfigError

struct BssScenario {
  ScenarioKind kind = ScenarioKind::QpskSources;
  std::uint64_t seed = 0;
  FloatMatrix x;  // sources, N×M
  FloatMatrix h;  // mixing, N×N
  FloatMatrix y;  // H·X
};

inline constexpr double kMixingConditionBound = 20.0;

// Deterministic in (n, m, seed, kind). The mixing matrix is scaled so the
// mixtures fit a Q(10,8) word: qpsk_sources and two_tone never exceed 1.75
// in magnitude; gaussian_mix_check rows have power 0.5.
BssScenario generate_bss(std::size_t n, std::size_t m, std::uint64_t seed, ScenarioKind kind);

double condition_number(const FloatMatrix& h);

}  // namespace icaprep
