#include "icaprep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

// Off-diagonal strength of the qpsk/two_tone mixing matrix H = a(I + bG).
constexpr double kMixingStrength = 0.07;
// Largest allowed |y| for bounded sources, and largest allowed eigenvalue of H·H^H.
constexpr double kPeakBound = 1.75;
constexpr double kMaxEigen = 1.5;
constexpr double kGaussianRowPower = 0.5;
constexpr int kMaxRedraws = 1000;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circular complex Gaussian with unit variance.
  cdouble cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double off_norm(const FloatMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += std::norm(a(i, j));
    }
  }
  return std::sqrt(s);
}

void require_square(const FloatMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ContractViolation(std::string(what) + ": matrix must be square");
}

FloatMatrix random_unitary(std::size_t n, Rng& rng) {
  FloatMatrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q(i, j) = rng.cnormal();
  }
  // Modified Gram-Schmidt over columns.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      cdouble dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += std::conj(q(r, p)) * q(r, c);
      for (std::size_t r = 0; r < n; ++r) q(r, c) -= dot * q(r, p);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < n; ++r) nrm += std::norm(q(r, c));
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < n; ++r) q(r, c) /= nrm;
  }
  return q;
}

double max_eigenvalue(const FloatMatrix& hermitian) {
  const OracleEvd evd = oracle_evd(hermitian);
  return *std::max_element(evd.eigenvalues.begin(), evd.eigenvalues.end());
}

double max_row_abs_sum(const FloatMatrix& h) {
  double best = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < h.cols(); ++j) s += std::abs(h(i, j));
    best = std::max(best, s);
  }
  return best;
}

void scale(FloatMatrix& m, double k) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (auto& v : m.row(i)) v *= k;
  }
}

cdouble row_correlation(const FloatMatrix& x, std::size_t a, std::size_t b) {
  cdouble acc = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) acc += x(a, k) * std::conj(x(b, k));
  return acc / static_cast<double>(x.cols());
}

bool correlates_with_earlier(const FloatMatrix& x, std::size_t row) {
  const double bound = 3.0 / std::sqrt(static_cast<double>(x.cols()));
  for (std::size_t p = 0; p < row; ++p) {
    if (std::abs(row_correlation(x, row, p)) > bound) return true;
  }
  return false;
}

void fill_qpsk_row(FloatMatrix& x, std::size_t row, Rng& rng) {
  const double a = std::numbers::sqrt2 / 2.0;
  for (auto& v : x.row(row)) v = {rng.uniform() < 0.5 ? -a : a, rng.uniform() < 0.5 ? -a : a};
}

void fill_gaussian_row(FloatMatrix& x, std::size_t row, Rng& rng) {
  double power = 0.0;
  for (auto& v : x.row(row)) {
    v = rng.cnormal();
    power += std::norm(v);
  }
  const double k = 1.0 / std::sqrt(power / static_cast<double>(x.cols()));
  for (auto& v : x.row(row)) v *= k;
}

FloatMatrix draw_sources(std::size_t n, std::size_t m, ScenarioKind kind, Rng& rng) {
  FloatMatrix x(n, m);
  if (kind == ScenarioKind::TwoTone) {
    if (m - 1 < 2 * n) throw ConfigError("two_tone needs M > 2N distinct nonzero frequency bins");
    std::vector<std::uint64_t> bins(m - 1);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = k + 1;
    for (std::size_t k = 0; k < 2 * n; ++k) std::swap(bins[k], bins[k + rng.below(bins.size() - k)]);
    for (std::size_t r = 0; r < n; ++r) {
      const double f1 = 2.0 * std::numbers::pi * static_cast<double>(bins[2 * r]) / static_cast<double>(m);
      const double f2 = 2.0 * std::numbers::pi * static_cast<double>(bins[2 * r + 1]) / static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) {
        const double t = static_cast<double>(k);
        x(r, k) = (std::polar(1.0, f1 * t) + std::polar(1.0, f2 * t)) / std::numbers::sqrt2;
      }
    }
    return x;
  }
  for (std::size_t r = 0; r < n; ++r) {
    int attempts = 0;
    do {
      if (++attempts > kMaxRedraws) throw ConfigError("could not draw uncorrelated sources; increase M");
      if (kind == ScenarioKind::QpskSources) {
        fill_qpsk_row(x, r, rng);
      } else {
        fill_gaussian_row(x, r, rng);
      }
    } while (correlates_with_earlier(x, r));
  }
  return x;
}

FloatMatrix draw_mixing(std::size_t n, ScenarioKind kind, Rng& rng) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    FloatMatrix h(n, n);
    if (kind == ScenarioKind::GaussianMixCheck) {
      const FloatMatrix u = random_unitary(n, rng);
      const FloatMatrix v = random_unitary(n, rng);
      FloatMatrix s(n, n);
      for (std::size_t k = 0; k < n; ++k) s(k, k) = std::exp(rng.uniform() * std::log(kMixingConditionBound));
      h = matmul(matmul(u, s), adjoint(v));
      double peak_power = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double p = 0.0;
        for (std::size_t j = 0; j < n; ++j) p += std::norm(h(i, j));
        peak_power = std::max(peak_power, p);
      }
      scale(h, std::sqrt(kGaussianRowPower / peak_power));
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) h(i, j) = (i == j ? 1.0 : 0.0) + kMixingStrength * rng.cnormal();
      }
      const double peak_source = kind == ScenarioKind::TwoTone ? std::numbers::sqrt2 : 1.0;
      const double by_peak = kPeakBound / (peak_source * max_row_abs_sum(h));
      const double by_eigen = std::sqrt(kMaxEigen / max_eigenvalue(matmul(h, adjoint(h))));
      scale(h, std::min(by_peak, by_eigen));
    }
    if (condition_number(h) <= kMixingConditionBound) return h;
  }
  throw ConfigError("could not draw a well-conditioned mixing matrix");
}

}  // namespace

FloatMatrix float_identity(std::size_t n) {
  FloatMatrix m(n, n);
  for (std::size_t k = 0; k < n; ++k) m(k, k) = 1.0;
  return m;
}

FloatMatrix matmul(const FloatMatrix& a, const FloatMatrix& b) {
  if (a.cols() != b.rows()) throw ContractViolation("matmul: inner dimensions differ");
  FloatMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cdouble aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

FloatMatrix adjoint(const FloatMatrix& a) {
  FloatMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  }
  return t;
}

double max_abs_diff(const FloatMatrix& a, const FloatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("max_abs_diff: shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const cdouble d = a.data()[i] - b.data()[i];
    worst = std::max({worst, std::abs(d.real()), std::abs(d.imag())});
  }
  return worst;
}

double frobenius(const FloatMatrix& a) {
  double s = 0.0;
  for (const cdouble& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

FloatMatrix to_float(const CFixMatrix& m) {
  FloatMatrix f(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) f(i, j) = {m(i, j).re.value(), m(i, j).im.value()};
  }
  return f;
}

FloatMatrix to_float(const HermitianMatrix& m) { return to_float(m.to_full()); }

SignalMatrix quantize_signals(const FloatMatrix& y, FixFormat fmt) {
  fmt.validate();
  CFixMatrix q = make_cfix_matrix(y.rows(), y.cols(), fmt);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) q(i, j) = {quantize(y(i, j).real(), fmt), quantize(y(i, j).imag(), fmt)};
  }
  return SignalMatrix(std::move(q));
}

FloatMatrix oracle_center(const FloatMatrix& y) {
  FloatMatrix out = y;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    cdouble mean = 0.0;
    for (const cdouble& v : y.row(i)) mean += v;
    mean /= static_cast<double>(y.cols());
    for (auto& v : out.row(i)) v -= mean;
  }
  return out;
}

FloatMatrix oracle_cov(const FloatMatrix& y_bar) {
  const std::size_t n = y_bar.rows();
  const double inv_m = 1.0 / static_cast<double>(y_bar.cols());
  FloatMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cdouble acc = 0.0;
      for (std::size_t k = 0; k < y_bar.cols(); ++k) acc += y_bar(i, k) * std::conj(y_bar(j, k));
      acc *= inv_m;
      if (i == j) acc = acc.real();
      c(i, j) = acc;
      c(j, i) = std::conj(acc);
    }
  }
  return c;
}

OracleEvd oracle_evd(const FloatMatrix& input, int max_sweeps, double tol) {
  require_square(input, "oracle_evd");
  const std::size_t n = input.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (std::abs(input(i, j) - std::conj(input(j, i))) > 1e-10) {
        throw ContractViolation("oracle_evd: matrix is not Hermitian");
      }
    }
  }
  FloatMatrix a = input;
  for (std::size_t k = 0; k < n; ++k) a(k, k) = a(k, k).real();
  OracleEvd out;
  out.eigenvectors = float_identity(n);
  FloatMatrix& v = out.eigenvectors;
  const double threshold = tol * std::max(1.0, frobenius(input));

  out.off_norm_trace.push_back(off_norm(a));
  while (out.off_norm_trace.back() >= threshold) {
    if (out.sweeps == max_sweeps) throw ConvergenceError("cyclic Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble b = a(p, q);
        const double mag = std::abs(b);
        if (mag == 0.0) continue;
        const cdouble e = b / mag;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G = diag(1, conj(e)) · [[c, s], [-s, c]]; A <- G^H A G, V <- V G.
        const cdouble gpq = s;
        const cdouble gqp = -s * std::conj(e);
        const cdouble gqq = c * std::conj(e);
        for (std::size_t k = 0; k < n; ++k) {
          const cdouble akp = a(k, p);
          const cdouble akq = a(k, q);
          a(k, p) = c * akp + gqp * akq;
          a(k, q) = gpq * akp + gqq * akq;
          const cdouble vkp = v(k, p);
          const cdouble vkq = v(k, q);
          v(k, p) = c * vkp + gqp * vkq;
          v(k, q) = gpq * vkp + gqq * vkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cdouble apk = a(p, k);
          const cdouble aqk = a(q, k);
          a(p, k) = c * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    ++out.sweeps;
    out.off_norm_trace.push_back(off_norm(a));
  }
  for (std::size_t k = 0; k < n; ++k) out.eigenvalues.push_back(a(k, k).real());
  return out;
}

FloatMatrix whitening_matrix(const std::vector<double>& eigenvalues, const FloatMatrix& eigenvectors,
                             double floor_rel) {
  const std::size_t n = eigenvalues.size();
  if (eigenvectors.rows() != n || eigenvectors.cols() != n) throw ContractViolation("whitening: eigenvector shape");
  const double lmax = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (!(lmax > 0.0) || eigenvalues[k] < floor_rel * lmax) {
      throw RankDeficiencyError("eigenvalue " + std::to_string(k) + " (" + std::to_string(eigenvalues[k]) +
                                    ") is below the whitening floor",
                                k);
    }
  }
  FloatMatrix w = adjoint(eigenvectors);
  for (std::size_t k = 0; k < n; ++k) {
    const double g = 1.0 / std::sqrt(eigenvalues[k]);
    for (auto& x : w.row(k)) x *= g;
  }
  return w;
}

FloatMatrix oracle_whiten(const FloatMatrix& y_bar, const std::vector<double>& eigenvalues,
                          const FloatMatrix& eigenvectors, double floor_rel) {
  return matmul(whitening_matrix(eigenvalues, eigenvectors, floor_rel), y_bar);
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::QpskSources:
      return "qpsk_sources";
    case ScenarioKind::GaussianMixCheck:
      return "gaussian_mix_check";
    case ScenarioKind::TwoTone:
      return "two_tone";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (ScenarioKind k : {ScenarioKind::QpskSources, ScenarioKind::GaussianMixCheck, ScenarioKind::TwoTone}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

double condition_number(const FloatMatrix& h) {
  require_square(h, "condition_number");
  const OracleEvd evd = oracle_evd(matmul(h, adjoint(h)));
  const auto [lo, hi] = std::minmax_element(evd.eigenvalues.begin(), evd.eigenvalues.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(*hi / *lo);
}

BssScenario generate_bss(std::size_t n, std::size_t m, std::uint64_t seed, ScenarioKind kind) {
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even (got " + std::to_string(n) + ")");
  if (m < n) throw ConfigError("M must be >= N");
  Rng rng(seed);
  BssScenario sc;
  sc.kind = kind;
  sc.seed = seed;
  sc.x = draw_sources(n, m, kind, rng);
  sc.h = draw_mixing(n, kind, rng);
  sc.y = matmul(sc.h, sc.x);
  // Short records can correlate sources enough to push the sample covariance
  // past the mixing-matrix bound; shrink so the measured spectrum stays inside it.
  if (kind != ScenarioKind::GaussianMixCheck) {
    const double top = max_eigenvalue(oracle_cov(oracle_center(sc.y)));
    if (top > kMaxEigen) {
      const double k = std::sqrt(kMaxEigen / top);
      scale(sc.h, k);
      scale(sc.y, k);
    }
  }
  return sc;
}

}  // namespace icaprep
