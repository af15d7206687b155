#include "peakon/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "peakon/kernels.hpp"

namespace peakon {

PeakonEnsemble::PeakonEnsemble(std::vector<double> amplitudes, std::vector<double> positions,
                               std::string label)
    : amplitudes_(std::move(amplitudes)), positions_(std::move(positions)), label_(std::move(label)) {
  if (amplitudes_.empty()) throw std::invalid_argument("PeakonEnsemble: need at least one peakon");
  if (amplitudes_.size() != positions_.size()) {
    throw std::invalid_argument("PeakonEnsemble: amplitudes and positions differ in length");
  }
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (amplitudes_[i] == 0.0 || !std::isfinite(amplitudes_[i])) {
      throw std::invalid_argument("PeakonEnsemble: amplitude " + std::to_string(i + 1) +
                                  " must be finite and nonzero");
    }
    if (!std::isfinite(positions_[i])) {
      throw std::invalid_argument("PeakonEnsemble: position " + std::to_string(i + 1) + " is not finite");
    }
    m0_ += std::fabs(amplitudes_[i]);
  }
}

double PeakonEnsemble::signed_mass() const {
  return std::accumulate(amplitudes_.begin(), amplitudes_.end(), 0.0);
}

bool PeakonEnsemble::is_nondecreasing() const {
  return std::is_sorted(positions_.begin(), positions_.end());
}

bool PeakonEnsemble::is_strictly_increasing() const {
  return std::adjacent_find(positions_.begin(), positions_.end(),
                            [](double a, double b) { return !(a < b); }) == positions_.end();
}

PeakonEnsemble PeakonEnsemble::with_positions(std::vector<double> positions) const {
  return PeakonEnsemble(amplitudes_, std::move(positions), label_);
}

std::string to_string(EventKind kind) { return kind == EventKind::merge ? "merge" : "split"; }

std::vector<double> Trajectory::positions_at(double t) const {
  if (times.empty()) throw std::invalid_argument("positions_at: empty trajectory");
  const double slack = 1e-12 * std::max(1.0, std::fabs(times.back()));
  if (t < times.front() - slack || t > times.back() + slack) {
    throw std::invalid_argument("positions_at: time " + format_double(t) + " outside trajectory span");
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return positions.front();
  if (it == times.end()) return positions.back();
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  std::vector<double> out(positions[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = positions[lo][i] + w * (positions[hi][i] - positions[lo][i]);
  }
  return out;
}

void Trajectory::validate() const {
  if (times.size() != positions.size()) throw std::invalid_argument("Trajectory: times/positions mismatch");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("Trajectory: times not strictly increasing at row " + std::to_string(k));
    }
  }
  for (const auto& row : positions) {
    if (row.size() != particles()) throw std::invalid_argument("Trajectory: ragged position rows");
  }
}

// ---- field evaluation -------------------------------------------------------

double eval_u(std::span<const double> amplitudes, std::span<const double> positions, double x) {
  double u = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) u += amplitudes[i] * kernel_G(x - positions[i]);
  return u;
}

double eval_u(const PeakonEnsemble& ens, double x) { return eval_u(ens.amplitudes(), ens.positions(), x); }

double eval_ux(std::span<const double> amplitudes, std::span<const double> positions, double x) {
  double ux = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) ux += amplitudes[i] * kernel_Gx(x - positions[i]);
  return ux;
}

double eval_ux(const PeakonEnsemble& ens, double x) { return eval_ux(ens.amplitudes(), ens.positions(), x); }

double mch_h0(const PeakonEnsemble& ens) {
  const auto p = ens.amplitudes();
  const auto x = ens.positions();
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) h += p[i] * p[j] * kernel_G(x[i] - x[j]);
  }
  return h;
}

double hamiltonian_H(const PeakonEnsemble& ens, double /*t*/) {
  if (!ens.is_nondecreasing()) throw std::invalid_argument("hamiltonian_H: positions must be ordered");
  const auto p = ens.amplitudes();
  const auto x = ens.positions();
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) h += p[i] * p[j] * std::exp(x[i] - x[j]);
  }
  return h;
}

double hamiltonian_H_comoving(std::span<const double> amplitudes, std::span<const double> comoving,
                              double t) {
  if (amplitudes.size() != comoving.size()) throw std::invalid_argument("hamiltonian_H_comoving: size mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    for (std::size_t j = i + 1; j < amplitudes.size(); ++j) {
      const double pi = amplitudes[i];
      const double pj = amplitudes[j];
      h += pi * pj * std::exp((pi * pi - pj * pj) * t / 6.0 + comoving[i] - comoving[j]);
    }
  }
  return h;
}

namespace {

// Distinct sorted peak locations with summed amplitudes.
struct Peaks {
  std::vector<double> y;
  std::vector<double> mass;
};

Peaks collect_peaks(std::span<const double> amplitudes, std::span<const double> positions) {
  std::vector<std::size_t> order(amplitudes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  Peaks peaks;
  for (std::size_t idx : order) {
    if (!peaks.y.empty() && peaks.y.back() == positions[idx]) {
      peaks.mass.back() += amplitudes[idx];
    } else {
      peaks.y.push_back(positions[idx]);
      peaks.mass.push_back(amplitudes[idx]);
    }
  }
  return peaks;
}

// Left sums A_k = sum_{j<=k} m_j/2 e^{-(y_k - y_j)} and right sums
// R_k = sum_{j>=k} m_j/2 e^{-(y_j - y_k)}; both have nonpositive exponents.
void one_sided_sums(const Peaks& peaks, std::vector<double>& left, std::vector<double>& right) {
  const std::size_t n = peaks.y.size();
  left.assign(n, 0.0);
  right.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    left[k] = 0.5 * peaks.mass[k] + (k > 0 ? left[k - 1] * std::exp(peaks.y[k - 1] - peaks.y[k]) : 0.0);
  }
  for (std::size_t k = n; k-- > 0;) {
    right[k] = 0.5 * peaks.mass[k] + (k + 1 < n ? right[k + 1] * std::exp(peaks.y[k] - peaks.y[k + 1]) : 0.0);
  }
}

// Integral over [0, len] of |a e^{-s} + b e^{s - len}|, splitting at the sign change.
double abs_exp_pair_integral(double a, double b, double len) {
  auto antiderivative = [&](double s) { return -a * std::exp(-s) + b * std::exp(s - len); };
  double total = 0.0;
  double prev = 0.0;
  if (a != 0.0 && b != 0.0 && -a / b > 0.0) {
    const double root = 0.5 * (len + std::log(-a / b));
    if (root > 0.0 && root < len) {
      total += std::fabs(antiderivative(root) - antiderivative(0.0));
      prev = root;
    }
  }
  total += std::fabs(antiderivative(len) - antiderivative(prev));
  return total;
}

}  // namespace

FieldProfile analyze_field(std::span<const double> amplitudes, std::span<const double> positions) {
  const Peaks peaks = collect_peaks(amplitudes, positions);
  const std::size_t n = peaks.y.size();
  std::vector<double> left;
  std::vector<double> right;
  one_sided_sums(peaks, left, right);

  FieldProfile out;
  // Tails: u and u_x are single exponentials decaying to 0.
  out.tv_u = std::fabs(right[0]) + std::fabs(left[n - 1]);
  out.tv_ux = std::fabs(right[0]) + std::fabs(left[n - 1]);

  std::vector<double> u_at(n);
  for (std::size_t k = 0; k < n; ++k) {
    u_at[k] = left[k] + right[k] - 0.5 * peaks.mass[k];
    out.sup_u = std::max(out.sup_u, std::fabs(u_at[k]));
    // u_x(y_k -) - u_x(y_k +) = m_k
    out.tv_ux += std::fabs(peaks.mass[k]);
    const double ux_minus = right[k] - (left[k] - 0.5 * peaks.mass[k]);
    const double ux_plus = ux_minus - peaks.mass[k];
    out.sup_ux = std::max({out.sup_ux, std::fabs(ux_minus), std::fabs(ux_plus)});
  }

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double len = peaks.y[k + 1] - peaks.y[k];
    const double a = left[k];
    const double b = right[k + 1];
    const double decay = std::exp(-len);
    // u = a e^{-s} + b e^{s-len}, u_x = -a e^{-s} + b e^{s-len}, u_xx = u.
    const double u0 = u_at[k];
    const double u1 = u_at[k + 1];
    double var_u = std::fabs(u1 - u0);
    if (a / b > 0.0) {
      const double s = 0.5 * (len + std::log(a / b));
      if (s > 0.0 && s < len) {
        const double ustar = a * std::exp(-s) + b * std::exp(s - len);
        var_u = std::fabs(ustar - u0) + std::fabs(u1 - ustar);
        out.sup_u = std::max(out.sup_u, std::fabs(ustar));
      }
    }
    out.tv_u += var_u;

    const double ux0 = -a + b * decay;
    const double ux1 = -a * decay + b;
    double var_ux = std::fabs(ux1 - ux0);
    if (-a / b > 0.0) {
      const double s = 0.5 * (len + std::log(-a / b));
      if (s > 0.0 && s < len) {
        const double uxstar = -a * std::exp(-s) + b * std::exp(s - len);
        var_ux = std::fabs(uxstar - ux0) + std::fabs(ux1 - uxstar);
        out.sup_ux = std::max(out.sup_ux, std::fabs(uxstar));
      }
    }
    out.tv_ux += var_ux;
  }
  return out;
}

L1Difference l1_difference(std::span<const double> amplitudes_a, std::span<const double> positions_a,
                           std::span<const double> amplitudes_b, std::span<const double> positions_b) {
  // The difference of two peakon fields is again a peakon field with signed masses.
  std::vector<double> amps(amplitudes_a.begin(), amplitudes_a.end());
  std::vector<double> pos(positions_a.begin(), positions_a.end());
  for (std::size_t i = 0; i < amplitudes_b.size(); ++i) {
    amps.push_back(-amplitudes_b[i]);
    pos.push_back(positions_b[i]);
  }
  const Peaks peaks = collect_peaks(amps, pos);
  const std::size_t n = peaks.y.size();
  std::vector<double> left;
  std::vector<double> right;
  one_sided_sums(peaks, left, right);

  L1Difference out;
  out.u = std::fabs(right[0]) + std::fabs(left[n - 1]);
  out.ux = out.u;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double len = peaks.y[k + 1] - peaks.y[k];
    // Between union breakpoints each field is a e^{-s} + b e^{s-len}; integrate
    // exactly, splitting at the single possible sign change.
    out.u += abs_exp_pair_integral(left[k], right[k + 1], len);
    out.ux += abs_exp_pair_integral(-left[k], right[k + 1], len);
  }
  return out;
}

// ---- serialization ----------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.particles();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (double x : traj.positions[k]) os << ',' << format_double(x);
    os << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_trajectory_csv: empty input");
  std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::size_t particles = 0;
  {
    std::stringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "t") throw std::invalid_argument("read_trajectory_csv: first column must be 't'");
    while (std::getline(header, cell, ',')) {
      if (!cell.empty() && cell[0] == 'x') ++particles;
    }
  }
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      auto res = std::from_chars(line.data() + start, line.data() + end, v);
      if (res.ec != std::errc() || res.ptr != line.data() + end) {
        throw std::invalid_argument("read_trajectory_csv: bad number on line " + std::to_string(row));
      }
      values.push_back(v);
      start = end + 1;
    }
    if (values.size() != columns) {
      throw std::invalid_argument("read_trajectory_csv: wrong column count on line " + std::to_string(row));
    }
    traj.times.push_back(values[0]);
    traj.positions.emplace_back(values.begin() + 1, values.begin() + 1 + static_cast<long>(particles));
  }
  return traj;
}

std::string events_to_json(const std::vector<Event>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : events) {
    nlohmann::json j;
    j["time"] = e.time;
    j["kind"] = to_string(e.kind);
    std::vector<std::size_t> labels;
    for (auto i : e.indices) labels.push_back(i + 1);
    j["indices"] = labels;
    if (e.kind == EventKind::split) {
      std::vector<std::size_t> block;
      for (auto i : e.left_block) block.push_back(i + 1);
      j["left_block"] = block;
    }
    arr.push_back(j);
  }
  return arr.dump(2);
}

void write_events_json(const std::string& path, const std::vector<Event>& events) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << events_to_json(events) << '\n';
}

}  // namespace peakon
