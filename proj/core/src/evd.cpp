#include "icaprep/evd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

void require_2x2(const CFixMatrix& m, const CordicConfig& cfg, const char* what) {
  if (m.rows() != 2 || m.cols() != 2) throw ContractViolation(std::string(what) + ": block must be 2x2");
  for (const CFix& z : m.data()) {
    if (!(z.format() == cfg.fmt)) throw ContractViolation(std::string(what) + ": block format differs from CORDIC format");
  }
}

std::int64_t raw_diff(const FixPoint& a, const FixPoint& b) { return std::abs(std::int64_t{a.raw()} - b.raw()); }
std::int64_t raw_sum(const FixPoint& a, const FixPoint& b) { return std::abs(std::int64_t{a.raw()} + b.raw()); }

// Complex value at CORDIC internal precision. Pipeline registers between
// stages keep the guard bits; only writeback to D and E rounds to the word.
struct WideC {
  std::int64_t re = 0;
  std::int64_t im = 0;
};

WideC widen(const CFix& z, const CordicConfig& cfg) { return {to_internal(z.re, cfg), to_internal(z.im, cfg)}; }
CFix narrow(const WideC& z, const CordicConfig& cfg) { return {from_internal(z.re, cfg), from_internal(z.im, cfg)}; }

void rotate_value(WideC& z, const DirectionSequence& dirs, const CordicConfig& cfg) {
  const WidePair r = rotate_internal({z.re, z.im}, dirs, cfg);
  z = {r.x, r.y};
}

// Rotates the (re, re) and (im, im) component pairs of (a, b) by `dirs`.
void rotate_pair(WideC& a, WideC& b, const DirectionSequence& dirs, const CordicConfig& cfg) {
  const WidePair re = rotate_internal({a.re, b.re}, dirs, cfg);
  const WidePair im = rotate_internal({a.im, b.im}, dirs, cfg);
  a = {re.x, im.x};
  b = {re.y, im.y};
}

void require_even(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even (got " + std::to_string(n) + ")");
}

}  // namespace

RotationParams RotationParams::identity(int i, int j, const CordicConfig& cfg, std::uint64_t epoch) {
  return {DirectionSequence::identity(cfg.iterations), DirectionSequence::identity(cfg.iterations), i, j, epoch};
}

Diag2x2Result diagonalize_2x2(const CFixMatrix& p, const CordicConfig& cfg, std::uint64_t epoch) {
  require_2x2(p, cfg, "diagonalize_2x2");
  const CFix& p12 = p(0, 1);
  const CFix& p21 = p(1, 0);
  if (raw_diff(p12.re, p21.re) > 1 || raw_sum(p12.im, p21.im) > 1 || std::abs(p(0, 0).im.raw()) > 1 ||
      std::abs(p(1, 1).im.raw()) > 1) {
    throw ContractViolation("diagonalize_2x2: block is not Hermitian within 1 LSB");
  }
  const FixFormat fmt = cfg.fmt;
  const FixPoint zero = FixPoint::from_raw(0, fmt);
  const FixPoint a = p(0, 0).re;
  const FixPoint d = p(1, 1).re;

  Diag2x2Result out{a, d, zero, RotationParams::identity(0, 1, cfg, epoch), make_cfix_matrix(2, 2, fmt)};
  out.after_phase(0, 0) = {a, zero};
  out.after_phase(1, 1) = {d, zero};
  if (p12.re.raw() == 0 && p12.im.raw() == 0) return out;

  // Stages 1-2: rotate column 2 by -theta, row 2 by +theta. The diagonal
  // passes through unchanged and p12 becomes |p12|.
  FixPoint c = p12.re;
  if (p12.im.raw() != 0) {
    VectoringResult v = vectoring(p12.re, p12.im, cfg);
    c = v.magnitude;
    out.params.theta = std::move(v.dirs);
  }
  out.after_phase(0, 1) = {c, zero};
  out.after_phase(1, 0) = {c, zero};
  if (c.raw() == 0) return out;

  // Stage 3: tan(2 phi) = 2c / (a - d).
  std::int64_t x = std::int64_t{a.raw()} - d.raw();
  std::int64_t y = 2 * std::int64_t{c.raw()};
  if (x < 0) {
    x = -x;
    y = -y;
  }
  const DirectionSequence two_phi = vectoring_directions(x, y, cfg);
  out.params.phi = angle_to_dirs(two_phi.angle() / 2.0, cfg);

  const std::int64_t aw = to_internal(a, cfg);
  const std::int64_t cw = to_internal(c, cfg);
  const std::int64_t dw = to_internal(d, cfg);
  // Stage 4: R^T from the left, one column at a time.
  const WidePair col1 = rotate_internal({aw, cw}, out.params.phi, cfg);
  const WidePair col2 = rotate_internal({cw, dw}, out.params.phi, cfg);
  // Stage 5: R from the right, one row at a time.
  const WidePair row1 = rotate_internal({col1.x, col2.x}, out.params.phi, cfg);
  const WidePair row2 = rotate_internal({col1.y, col2.y}, out.params.phi, cfg);
  out.d1 = from_internal(row1.x, cfg);
  out.d2 = from_internal(row2.y, cfg);
  out.residual = from_internal(row1.y, cfg);
  return out;
}

CFixMatrix rotate_offdiag(const CFixMatrix& s, const RotationParams& row, const RotationParams& col,
                          const CordicConfig& cfg) {
  require_2x2(s, cfg, "rotate_offdiag");
  if (row.epoch != col.epoch) {
    throw ContractViolation("rotate_offdiag: rotation parameters come from different orderings (epoch " +
                            std::to_string(row.epoch) + " vs " + std::to_string(col.epoch) + ")");
  }
  WideC w[2][2];
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) w[i][j] = widen(s(i, j), cfg);
  }
  const DirectionSequence row_theta = row.theta.reversed();
  rotate_value(w[1][0], row_theta, cfg);
  rotate_value(w[1][1], row_theta, cfg);
  rotate_value(w[0][1], col.theta, cfg);
  rotate_value(w[1][1], col.theta, cfg);
  for (std::size_t k = 0; k < 2; ++k) rotate_pair(w[0][k], w[1][k], row.phi, cfg);
  for (std::size_t k = 0; k < 2; ++k) rotate_pair(w[k][0], w[k][1], col.phi, cfg);
  CFixMatrix r(2, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) r(i, j) = narrow(w[i][j], cfg);
  }
  return r;
}

std::pair<CFix, CFix> rotate_right(const CFix& x1, const CFix& x2, const RotationParams& params,
                                   const CordicConfig& cfg) {
  WideC a = widen(x1, cfg);
  WideC b = widen(x2, cfg);
  rotate_value(b, params.theta, cfg);
  rotate_pair(a, b, params.phi, cfg);
  return {narrow(a, cfg), narrow(b, cfg)};
}

std::vector<Ordering> parallel_ordering(std::size_t n) {
  require_even(n);
  const std::size_t pairs = n / 2;
  std::vector<int> top(pairs);
  std::vector<int> bot(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    top[k] = static_cast<int>(2 * k);
    bot[k] = static_cast<int>(2 * k + 1);
  }
  std::vector<Ordering> out;
  for (std::size_t round = 0; round + 1 < n; ++round) {
    Ordering ord;
    for (std::size_t k = 0; k < pairs; ++k) ord.emplace_back(std::min(top[k], bot[k]), std::max(top[k], bot[k]));
    out.push_back(std::move(ord));
    if (pairs < 2) break;
    // Top-left index stays; everything else moves one place around the ring.
    std::vector<int> nt(pairs);
    std::vector<int> nb(pairs);
    nt[0] = top[0];
    nt[1] = bot[0];
    for (std::size_t k = 2; k < pairs; ++k) nt[k] = top[k - 1];
    for (std::size_t k = 0; k + 1 < pairs; ++k) nb[k] = bot[k + 1];
    nb[pairs - 1] = top[pairs - 1];
    top = std::move(nt);
    bot = std::move(nb);
  }
  return out;
}

std::vector<BlockRef> row_major_sequence(std::size_t n) {
  require_even(n);
  const int pairs = static_cast<int>(n / 2);
  std::vector<BlockRef> seq;
  for (int r = 0; r < pairs; ++r) {
    for (int c = 0; c < pairs; ++c) seq.push_back({r, c});
  }
  return seq;
}

std::vector<BlockRef> submatrix_sequence(int ordering_index, std::size_t n) {
  const std::vector<Ordering> orderings = parallel_ordering(n);
  if (ordering_index < 0 || ordering_index >= static_cast<int>(orderings.size())) {
    throw ContractViolation("ordering index " + std::to_string(ordering_index) + " out of range");
  }
  const Ordering& cur = orderings[static_cast<std::size_t>(ordering_index)];
  const Ordering& next = orderings[static_cast<std::size_t>(ordering_index + 1) % orderings.size()];
  const int pairs = static_cast<int>(cur.size());

  auto holds = [](const std::pair<int, int>& pr, int idx) { return pr.first == idx || pr.second == idx; };
  constexpr int kNotNeeded = std::numeric_limits<int>::max();
  auto needed_at = [&](const BlockRef& b) {
    const auto& rp = cur[static_cast<std::size_t>(b.row)];
    const auto& cp = cur[static_cast<std::size_t>(b.col)];
    for (int t = 0; t < pairs; ++t) {
      const auto& np = next[static_cast<std::size_t>(t)];
      if ((holds(rp, np.first) && holds(cp, np.second)) || (holds(rp, np.second) && holds(cp, np.first))) return t;
    }
    return kNotNeeded;
  };

  std::vector<BlockRef> seq;
  for (int p = 0; p < pairs; ++p) seq.push_back({p, p});
  std::vector<std::pair<int, BlockRef>> off;
  for (const BlockRef& b : row_major_sequence(n)) {
    if (b.row != b.col) off.emplace_back(needed_at(b), b);
  }
  std::stable_sort(off.begin(), off.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, b] : off) seq.push_back(b);
  return seq;
}

void EvdCycleModel::validate() const {
  if (pipeline_depth < 1 || issue_interval < 1 || sweeps < 1 || stages < 1) {
    throw ConfigError("EVD cycle model parameters must all be >= 1");
  }
}

PipelineStats simulate_evd_pipeline(std::size_t n, const EvdCycleModel& model, IssuePolicy policy) {
  model.validate();
  const std::vector<Ordering> orderings = parallel_ordering(n);
  const std::int64_t depth = model.pipeline_depth;
  const std::int64_t ii = model.issue_interval;

  // Cycle at which each matrix element's latest value leaves the pipeline.
  Matrix<std::int64_t> ready(n, n, 0);
  PipelineStats st;
  std::int64_t t_next = 0;
  std::int64_t last_issue = -1;
  int ordering_count = 0;
  for (int s = 0; s < model.sweeps; ++s) {
    for (std::size_t o = 0; o < orderings.size(); ++o, ++ordering_count) {
      const Ordering& ord = orderings[o];
      const std::vector<BlockRef> seq =
          policy == IssuePolicy::HazardFree ? submatrix_sequence(static_cast<int>(o), n) : row_major_sequence(n);
      std::int64_t boundary_stall = 0;
      if (policy == IssuePolicy::NaiveBarrier && last_issue >= 0) {
        const std::int64_t drained = last_issue + depth;
        if (drained > t_next) {
          boundary_stall += drained - t_next;
          t_next = drained;
        }
      }
      std::int64_t first_issue = -1;
      for (const BlockRef& b : seq) {
        const auto& rp = ord[static_cast<std::size_t>(b.row)];
        const auto& cp = ord[static_cast<std::size_t>(b.col)];
        const int rows[2] = {rp.first, rp.second};
        const int cols[2] = {cp.first, cp.second};
        std::int64_t issue = t_next;
        for (int r : rows) {
          for (int c : cols) issue = std::max(issue, ready(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
        }
        boundary_stall += issue - t_next;
        for (int r : rows) {
          for (int c : cols) ready(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = issue + depth;
        }
        if (first_issue < 0) first_issue = issue;
        last_issue = issue;
        t_next = issue + ii;
        st.issue_cycles += ii;
      }
      st.stall_cycles += boundary_stall;
      st.max_boundary_stall = std::max(st.max_boundary_stall, boundary_stall);
      st.orderings.push_back({"sweep" + std::to_string(s) + "_ordering" + std::to_string(o), {"evd"}, 0, first_issue,
                              last_issue + ii});
    }
  }
  st.max_boundary_idle = st.max_boundary_stall * model.stages;
  st.drain_cycles = depth > ii ? depth - ii : 0;
  st.total_cycles = st.issue_cycles + st.stall_cycles;
  return st;
}

std::int64_t evd_cycle_formula(std::size_t n, const EvdCycleModel& model) {
  const auto nn = static_cast<std::int64_t>(n);
  return std::int64_t{model.sweeps} * (nn - 1) * (nn / 2) * (nn / 2) * model.issue_interval;
}

double off_norm_lsb(const CFixMatrix& d) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (i == j) continue;
      const double re = d(i, j).re.raw();
      const double im = d(i, j).im.raw();
      sum += re * re + im * im;
    }
  }
  return std::sqrt(sum);
}

EvdResult evd_run(const HermitianMatrix& yc, const EvdCycleModel& model, const CordicConfig& cfg,
                  const EvdOptions& options) {
  model.validate();
  const std::size_t n = yc.size();
  require_even(n);
  if (!(yc.format() == cfg.fmt)) throw ContractViolation("evd_run: covariance format differs from CORDIC format");
  const FixFormat fmt = cfg.fmt;
  const FixPoint zero = FixPoint::from_raw(0, fmt);

  SaturationScope sat;
  EvdResult res;
  res.d = yc.to_full();
  Matrix<WideC> e(n, n);
  for (std::size_t k = 0; k < n; ++k) e(k, k) = widen(CFix::from_raw(std::int64_t{1} << fmt.frac_bits, 0, fmt), cfg);

  const std::vector<Ordering> orderings = parallel_ordering(n);
  CFixMatrix& d = res.d;
  std::uint64_t epoch = 0;
  for (int s = 0; s < model.sweeps; ++s) {
    for (const Ordering& ord : orderings) {
      ++epoch;
      const std::size_t pairs = ord.size();
      std::vector<RotationParams> params;
      params.reserve(pairs);
      for (const auto& [i, j] : ord) {
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        CFixMatrix blk = make_cfix_matrix(2, 2, fmt);
        blk(0, 0) = d(ui, ui);
        blk(0, 1) = d(ui, uj);
        blk(1, 0) = d(uj, ui);
        blk(1, 1) = d(uj, uj);
        Diag2x2Result r = diagonalize_2x2(blk, cfg, epoch);
        r.params.i = i;
        r.params.j = j;
        d(ui, ui) = {r.d1, zero};
        d(uj, uj) = {r.d2, zero};
        d(ui, uj) = {r.residual, zero};
        d(uj, ui) = {r.residual, zero};
        params.push_back(std::move(r.params));
      }
      for (std::size_t p = 0; p < pairs; ++p) {
        for (std::size_t q = p + 1; q < pairs; ++q) {
          const std::size_t rows[2] = {static_cast<std::size_t>(ord[p].first), static_cast<std::size_t>(ord[p].second)};
          const std::size_t cols[2] = {static_cast<std::size_t>(ord[q].first), static_cast<std::size_t>(ord[q].second)};
          CFixMatrix blk = make_cfix_matrix(2, 2, fmt);
          for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t b = 0; b < 2; ++b) blk(a, b) = d(rows[a], cols[b]);
          }
          const CFixMatrix out = rotate_offdiag(blk, params[p], params[q], cfg);
          for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t b = 0; b < 2; ++b) {
              d(rows[a], cols[b]) = out(a, b);
              d(cols[b], rows[a]) = cfx_conj(out(a, b));
            }
          }
        }
      }
      for (std::size_t r = 0; r < n; ++r) {
        for (const RotationParams& prm : params) {
          WideC& x1 = e(r, static_cast<std::size_t>(prm.i));
          WideC& x2 = e(r, static_cast<std::size_t>(prm.j));
          rotate_value(x2, prm.theta, cfg);
          rotate_pair(x1, x2, prm.phi, cfg);
          if (!options.wide_eigenvectors) {
            x1 = widen(narrow(x1, cfg), cfg);
            x2 = widen(narrow(x2, cfg), cfg);
          }
        }
      }
      std::int64_t trace = 0;
      for (std::size_t k = 0; k < n; ++k) trace += d(k, k).re.raw();
      res.trace_raw_per_ordering.push_back(trace);
    }
    res.off_norm_lsb_per_sweep.push_back(off_norm_lsb(d));
  }

  res.e = make_cfix_matrix(n, n, fmt);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) res.e(r, c) = narrow(e(r, c), cfg);
  }
  for (std::size_t k = 0; k < n; ++k) res.eigenvalues.push_back(d(k, k).re);
  res.pipeline = simulate_evd_pipeline(n, model, IssuePolicy::HazardFree);
  res.ledger.phases = res.pipeline.orderings;
  res.ledger.latency = res.pipeline.total_cycles;
  res.ledger.period = res.pipeline.total_cycles;
  res.saturations = sat.count();
  return res;
}

}  // namespace icaprep
