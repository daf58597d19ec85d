#include "icaprep/prep.hpp"

#include <algorithm>
#include <string>

#include "icaprep/ecmma.hpp"
#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

constexpr const char* kWritePort = "input_write";
constexpr const char* kCcBank = "cc_bank";
constexpr const char* kDsc = "dsc";
constexpr const char* kEcmma = "ecmma";
constexpr const char* kCenteredPort = "centered_mem_port";

void validate_shape(std::size_t n, std::size_t m) {
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even and >= 2 (got " + std::to_string(n) + ")");
  if (m < 2 || !is_power_of_two(static_cast<std::int64_t>(m))) {
    throw ConfigError("M must be a power of two >= 2 (got " + std::to_string(m) + ")");
  }
}

void validate_formats(const CFixMatrix& data, const FixFormat& fmt) {
  for (const CFix& z : data.data()) {
    if (!(z.re.format() == fmt) || !(z.im.format() == fmt)) {
      throw ContractViolation("signal matrix mixes fixed-point formats");
    }
  }
}

std::vector<FixPoint> component(std::span<const CFix> row, bool imag) {
  std::vector<FixPoint> out;
  out.reserve(row.size());
  for (const CFix& z : row) out.push_back(imag ? z.im : z.re);
  return out;
}

void require_same_length(std::span<const CFix> a, std::span<const CFix> b) {
  if (a.size() != b.size()) throw ContractViolation("row lengths differ");
  if (a.empty()) throw ConfigError("empty row");
}

enum class ActionKind { Accumulate, Subtract, DscDiag, DscOff, Ecmma };

struct Action {
  ActionKind kind;
  int pair = 0;      // pair index, or row pair for Ecmma
  int col_pair = 0;  // Ecmma only
  std::int64_t start = 0;
};

CycleLedger build_schedule(std::size_t n_signals, std::size_t m_samples, int stream_length,
                           std::vector<Action>* actions) {
  validate_shape(n_signals, m_samples);
  if (stream_length < 1) throw ConfigError("stream length must be >= 1");
  const auto n = static_cast<std::int64_t>(n_signals);
  const auto m = static_cast<std::int64_t>(m_samples);
  const int pairs = static_cast<int>(n / 2);
  const std::vector<BlockPair> plan = submatrix_plan(n_signals);

  ResourceScheduler sched;
  std::vector<std::int64_t> completion;
  std::int64_t prev_cc_end = 0;
  // Cycle after which the previous matrix no longer reads centered pair k.
  std::vector<std::int64_t> last_read(static_cast<std::size_t>(pairs), 0);

  auto record = [&](int b, ActionKind kind, int p, int q, std::int64_t start) {
    if (actions != nullptr && b == 0) actions->push_back({kind, p, q, start});
  };

  for (int b = 0; b < stream_length; ++b) {
    const std::string tag = "[" + std::to_string(b) + "]";
    const std::int64_t write_end = sched.schedule("write" + tag, {kWritePort}, prev_cc_end, n * m / 2, b).end;

    std::vector<std::int64_t> centered_at(static_cast<std::size_t>(pairs), 0);
    std::vector<std::int64_t> reads_done(static_cast<std::size_t>(pairs), 0);
    std::int64_t done = 0;

    auto offdiag = [&](int k) {
      const Phase& off = sched.schedule("dsc_offdiag" + std::to_string(k) + tag, {kDsc, kCenteredPort},
                                        centered_at[static_cast<std::size_t>(k)], m, b);
      record(b, ActionKind::DscOff, k, k, off.start);
      reads_done[static_cast<std::size_t>(k)] = std::max(reads_done[static_cast<std::size_t>(k)], off.end);
      done = std::max(done, off.end);
    };

    for (int k = 0; k < pairs; ++k) {
      const Phase acc = sched.schedule("cc_accumulate" + std::to_string(k) + tag, {kCcBank}, write_end, m, b);
      record(b, ActionKind::Accumulate, k, k, acc.start);
      if (k > 0) offdiag(k - 1);

      std::int64_t start = std::max(acc.end, last_read[static_cast<std::size_t>(k)]);
      for (const char* r : {kCcBank, kDsc, kCenteredPort}) start = std::max(start, sched.free_at(r));
      const Phase sub = sched.schedule("cc_subtract" + std::to_string(k) + tag, {kCcBank, kCenteredPort}, start, m, b);
      record(b, ActionKind::Subtract, k, k, sub.start);
      const Phase diag = sched.schedule("dsc_diag" + std::to_string(k) + tag, {kDsc}, start, m, b);
      record(b, ActionKind::DscDiag, k, k, diag.start);
      centered_at[static_cast<std::size_t>(k)] = sub.end;
      done = std::max(done, diag.end);
      prev_cc_end = sub.end;
    }
    offdiag(pairs - 1);

    for (const BlockPair& blk : plan) {
      const auto r = static_cast<std::size_t>(blk.row_pair);
      const auto c = static_cast<std::size_t>(blk.col_pair);
      const Phase& e = sched.schedule(
          "ecmma" + std::to_string(blk.row_pair) + "_" + std::to_string(blk.col_pair) + tag, {kEcmma},
          std::max(centered_at[r], centered_at[c]), 2 * m, b);
      record(b, ActionKind::Ecmma, blk.row_pair, blk.col_pair, e.start);
      reads_done[r] = std::max(reads_done[r], e.end);
      reads_done[c] = std::max(reads_done[c], e.end);
      done = std::max(done, e.end);
    }
    last_read = reads_done;
    completion.push_back(done);
  }

  CycleLedger ledger;
  ledger.phases = sched.phases();
  std::stable_sort(ledger.phases.begin(), ledger.phases.end(),
                   [](const Phase& a, const Phase& b) { return a.start < b.start; });
  ledger.latency = completion.front();
  if (completion.size() >= 2) ledger.period = completion.back() - completion[completion.size() - 2];
  return ledger;
}

}  // namespace

SignalMatrix::SignalMatrix(std::size_t n, std::size_t m, FixFormat fmt)
    : data_((validate_shape(n, m), fmt.validate(), make_cfix_matrix(n, m, fmt))), fmt_(fmt) {}

SignalMatrix::SignalMatrix(CFixMatrix data) : data_(std::move(data)) {
  validate_shape(data_.rows(), data_.cols());
  fmt_ = data_(0, 0).format();
  validate_formats(data_, fmt_);
}

HermitianMatrix::HermitianMatrix(std::size_t n, FixFormat fmt)
    : n_(n), fmt_(fmt), upper_(n * (n + 1) / 2, CFix::zero(fmt)) {}

HermitianMatrix HermitianMatrix::from_full(const CFixMatrix& full, int tolerance_lsb) {
  if (full.rows() != full.cols()) throw ContractViolation("Hermitian matrix must be square");
  if (full.rows() == 0) throw ContractViolation("empty matrix");
  HermitianMatrix h(full.rows(), full(0, 0).format());
  for (std::size_t i = 0; i < h.n_; ++i) {
    for (std::size_t j = i; j < h.n_; ++j) {
      const CFix& u = full(i, j);
      const CFix& l = full(j, i);
      const auto dre = std::abs(std::int64_t{u.re.raw()} - l.re.raw());
      const auto dim = std::abs(std::int64_t{u.im.raw()} + l.im.raw());
      if (dre > tolerance_lsb || (i != j && dim > tolerance_lsb)) {
        throw ContractViolation("matrix is not Hermitian at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (i == j) {
        h.set(i, i, {u.re, FixPoint::from_raw(0, h.fmt_)});
      } else {
        h.set(i, j, u);
      }
    }
  }
  return h;
}

CFix HermitianMatrix::get(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ContractViolation("Hermitian index out of range");
  if (i <= j) return upper_[index(i, j)];
  return cfx_conj(upper_[index(j, i)]);
}

void HermitianMatrix::set(std::size_t i, std::size_t j, const CFix& value) {
  if (i >= n_ || j >= n_) throw ContractViolation("Hermitian index out of range");
  if (!(value.format() == fmt_)) throw ContractViolation("Hermitian entry format differs");
  if (i == j) {
    if (value.im.raw() != 0) throw ContractViolation("Hermitian diagonal must be real");
    if (value.re.raw() < -1) throw ContractViolation("covariance diagonal is negative");
  }
  if (i <= j) {
    upper_[index(i, j)] = value;
  } else {
    upper_[index(j, i)] = cfx_conj(value);
  }
}

CFixMatrix HermitianMatrix::to_full() const {
  CFixMatrix out = make_cfix_matrix(n_, n_, fmt_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out(i, j) = get(i, j);
  }
  return out;
}

CFix complex_mean(std::span<const CFix> row) {
  if (row.empty()) throw ConfigError("empty row");
  const auto re = component(row, false);
  const auto im = component(row, true);
  return {fx_mean_accumulate(re), fx_mean_accumulate(im)};
}

CenteredPair center_pair(std::span<const CFix> y_a, std::span<const CFix> y_b) {
  require_same_length(y_a, y_b);
  CenteredPair out;
  out.mean_a = complex_mean(y_a);
  out.mean_b = complex_mean(y_b);
  out.a.reserve(y_a.size());
  out.b.reserve(y_b.size());
  for (const CFix& z : y_a) out.a.push_back(cfx_sub(z, out.mean_a));
  for (const CFix& z : y_b) out.b.push_back(cfx_sub(z, out.mean_b));
  out.cycles = 2 * static_cast<std::int64_t>(y_a.size());
  return out;
}

DscDiag dsc_compute_diag(std::span<const CFix> y_bar_a, std::span<const CFix> y_bar_b) {
  require_same_length(y_bar_a, y_bar_b);
  const int shift = log2_exact(static_cast<std::int64_t>(y_bar_a.size()));
  const FixFormat fmt = y_bar_a.front().format();
  ComplexMac aa(fmt);
  ComplexMac bb(fmt);
  for (std::size_t k = 0; k < y_bar_a.size(); ++k) {
    aa.accumulate_conj(y_bar_a[k], y_bar_a[k]);
    bb.accumulate_conj(y_bar_b[k], y_bar_b[k]);
  }
  const FixPoint zero = FixPoint::from_raw(0, fmt);
  return {{aa.writeback(shift).re, zero}, {bb.writeback(shift).re, zero}, static_cast<std::int64_t>(y_bar_a.size())};
}

DscOffdiag dsc_compute_offdiag(std::span<const CFix> y_bar_a, std::span<const CFix> y_bar_b) {
  require_same_length(y_bar_a, y_bar_b);
  const int shift = log2_exact(static_cast<std::int64_t>(y_bar_a.size()));
  ComplexMac ab(y_bar_a.front().format());
  for (std::size_t k = 0; k < y_bar_a.size(); ++k) ab.accumulate_conj(y_bar_a[k], y_bar_b[k]);
  return {ab.writeback(shift), static_cast<std::int64_t>(y_bar_a.size())};
}

std::vector<BlockPair> submatrix_plan(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("N must be even (got " + std::to_string(n) + ")");
  const int pairs = static_cast<int>(n / 2);
  std::vector<BlockPair> plan;
  for (int r = 0; r < pairs; ++r) {
    for (int c = r + 1; c < pairs; ++c) plan.push_back({r, c});
  }
  return plan;
}

std::int64_t covariance_period_formula(std::int64_t n, std::int64_t m) { return (n * n * m - 2 * n * m) / 4; }

CycleLedger prep_schedule(std::size_t n, std::size_t m, int stream_length) {
  return build_schedule(n, m, stream_length, nullptr);
}

PrepResult run_prep(const SignalMatrix& y, int stream_length) {
  SaturationScope sat;
  std::vector<Action> actions;
  CycleLedger ledger = build_schedule(y.n(), y.m(), stream_length, &actions);
  std::stable_sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) { return a.start < b.start; });

  const FixFormat fmt = y.format();
  const int shift = log2_exact(static_cast<std::int64_t>(y.m()));
  SignalMatrix centered(y.n(), y.m(), fmt);
  HermitianMatrix cov(y.n(), fmt);
  std::vector<CFix> means(y.n(), CFix::zero(fmt));

  for (const Action& act : actions) {
    const auto a = static_cast<std::size_t>(2 * act.pair);
    switch (act.kind) {
      case ActionKind::Accumulate:
        means[a] = complex_mean(y.row(a));
        means[a + 1] = complex_mean(y.row(a + 1));
        break;
      case ActionKind::Subtract:
        for (std::size_t r = a; r < a + 2; ++r) {
          for (std::size_t k = 0; k < y.m(); ++k) centered(r, k) = cfx_sub(y(r, k), means[r]);
        }
        break;
      case ActionKind::DscDiag: {
        const DscDiag d = dsc_compute_diag(centered.row(a), centered.row(a + 1));
        cov.set(a, a, d.aa);
        cov.set(a + 1, a + 1, d.bb);
        break;
      }
      case ActionKind::DscOff:
        cov.set(a, a + 1, dsc_compute_offdiag(centered.row(a), centered.row(a + 1)).ab);
        break;
      case ActionKind::Ecmma: {
        const auto c = static_cast<std::size_t>(2 * act.col_pair);
        CFixMatrix xs = make_cfix_matrix(2, y.m(), fmt);
        CFixMatrix ys = make_cfix_matrix(2, y.m(), fmt);
        for (std::size_t r = 0; r < 2; ++r) {
          std::copy(centered.row(a + r).begin(), centered.row(a + r).end(), xs.row(r).begin());
          std::copy(centered.row(c + r).begin(), centered.row(c + r).end(), ys.row(r).begin());
        }
        const EcmmaResult res = ecmma_run(xs, ys, {2, static_cast<int>(y.m()), fmt, shift});
        for (std::size_t r = 0; r < 2; ++r) {
          for (std::size_t q = 0; q < 2; ++q) cov.set(a + r, c + q, res.product(r, q));
        }
        break;
      }
    }
  }
  return {std::move(centered), std::move(cov), std::move(ledger), sat.count()};
}

}  // namespace icaprep
