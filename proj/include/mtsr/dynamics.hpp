// Variational dynamics of the product state prod_i (C_ia |a> + C_ib |b>).
//
// Units: hbar = 1, energies in V0, time in t0 = hbar / V0. Equations of motion
//
//   i dC_ig/dt = -k C_i(not g) + J_ig C_ig,
//   J_ig = sum_{j nn i} (V^{g a} |C_ja|^2 + V^{g b} |C_jb|^2).
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mtsr/lattice.hpp"

namespace mtsr {

using Complex = std::complex<double>;

class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-site amplitude pairs plus the simulation clock (t0 units).
struct StateVector {
  std::vector<Complex> alpha;
  std::vector<Complex> beta;
  double time = 0.0;

  StateVector() = default;
  explicit StateVector(int sites) : alpha(sites, Complex(1.0, 0.0)), beta(sites, Complex(0.0, 0.0)) {}

  int sites() const { return static_cast<int>(alpha.size()); }
  double occupation(int i) const { return std::norm(alpha[i]); }  // |C_ia|^2
  double norm(int i) const { return std::norm(alpha[i]) + std::norm(beta[i]); }

  void set_pure(int i, Position p) {
    alpha[i] = p == Position::Alpha ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    beta[i] = p == Position::Alpha ? Complex(0.0, 0.0) : Complex(1.0, 0.0);
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline double max_norm_drift(const StateVector& s) {
  double worst = 0.0;
  for (int i = 0; i < s.sites(); ++i) worst = std::max(worst, std::abs(s.norm(i) - 1.0));
  return worst;
}

struct EomParams {
  double k = 0.1;    // hopping amplitude, V0
  double dt = 0.01;  // time step, t0

  void validate() const {
    if (!(k >= 0) || !std::isfinite(k)) throw std::invalid_argument("hopping amplitude k must be >= 0");
    if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be > 0");
  }
};

// Fixed-step RK4 integrator. Amplitudes are integrated as four real arrays
// (Re/Im of alpha/beta). Occupations are scattered into a grid padded by one
// halo row at each open end (left at zero, which truncates the neighbor sums)
// and one halo column on each side (copies of the wrapped columns), so the
// coupling sums are a fixed-offset stencil.
class Propagator {
 public:
  static constexpr double kDriftLimit = 1e-6;

  Propagator(const Lattice& lattice, const CouplingTable& table, EomParams params)
      : length_(lattice.length()), params_(params), table_(table) {
    params_.validate();
    const std::size_t padded = static_cast<std::size_t>(kWidth) * (length_ + 2);
    occ_a_.assign(padded + 2 * kGuard, 0.0);
    occ_b_.assign(padded + 2 * kGuard, 0.0);
    j_a_.assign(padded, 0.0);
    j_b_.assign(padded, 0.0);
    const std::size_t n = lattice.sites();
    for (auto* set : {&y_, &f_, &acc_, &tmp_})
      for (auto& v : *set) v.resize(n);
    for (Direction d : kAllDirections) {
      const auto [dc, dr] = step_of(d);
      offset_[index(d)] = dr * kWidth + dc;
    }
  }

  const EomParams& params() const { return params_; }
  const CouplingTable& table() const { return table_; }
  int sites() const { return kColumns * length_; }

  // dC/dt for amplitudes (a, b), written to (da, db).
  void derivative(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> da,
                  std::span<Complex> db) {
    load(a, b, tmp_);
    eval(tmp_, f_);
    for (int i = 0; i < sites(); ++i) {
      da[i] = Complex(f_[0][i], f_[1][i]);
      db[i] = Complex(f_[2][i], f_[3][i]);
    }
  }

  // One classical RK4 step; no renormalization.
  void step(StateVector& s) {
    load(s.alpha, s.beta, y_);
    advance();
    for (int i = 0; i < sites(); ++i) {
      s.alpha[i] = Complex(y_[0][i], y_[1][i]);
      s.beta[i] = Complex(y_[2][i], y_[3][i]);
    }
    s.time += params_.dt;
  }

  // E_v = -k sum_i 2 Re(C_ia^* C_ib) + sum_<ij> sum_gg' V^{gg'} |C_ig|^2 |C_jg'|^2
  double energy(const StateVector& s) {
    load(s.alpha, s.beta, tmp_);
    scatter_occupations(tmp_);
    coupling_fields();
    double kinetic = 0.0;
    double potential = 0.0;
    for (int i = 0; i < sites(); ++i) {
      kinetic += 2.0 * (s.alpha[i].real() * s.beta[i].real() + s.alpha[i].imag() * s.beta[i].imag());
      potential += std::norm(s.alpha[i]) * j_a_[padded(i)] + std::norm(s.beta[i]) * j_b_[padded(i)];
    }
    // each bond is counted from both ends
    return -params_.k * kinetic + 0.5 * potential;
  }

  // J_ig of the last evaluated state.
  double field(int site, Position p) const {
    return p == Position::Alpha ? j_a_[padded(site)] : j_b_[padded(site)];
  }

 private:
  static constexpr int kWidth = kColumns + 2;
  static constexpr int kGuard = 1;  // keeps the corner stencil reads in bounds
  static constexpr int padded(int site) {
    return (Lattice::row(site) + 1) * kWidth + Lattice::column(site) + 1;
  }

  using Planes = std::array<std::vector<double>, 4>;  // Re a, Im a, Re b, Im b

  static void load(std::span<const Complex> a, std::span<const Complex> b, Planes& out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      out[0][i] = a[i].real();
      out[1][i] = a[i].imag();
      out[2][i] = b[i].real();
      out[3][i] = b[i].imag();
    }
  }

  void advance() {
    const int n = sites();
    const double h = params_.dt;
    const double half = 0.5 * h;

    eval(y_, f_);
    for (int p = 0; p < 4; ++p) {
      const double* y = y_[p].data();
      const double* f = f_[p].data();
      double* acc = acc_[p].data();
      double* tmp = tmp_[p].data();
      for (int i = 0; i < n; ++i) {
        acc[i] = f[i];
        tmp[i] = y[i] + half * f[i];
      }
    }
    for (double c : {half, h}) {
      eval(tmp_, f_);
      for (int p = 0; p < 4; ++p) {
        const double* y = y_[p].data();
        const double* f = f_[p].data();
        double* acc = acc_[p].data();
        double* tmp = tmp_[p].data();
        for (int i = 0; i < n; ++i) {
          acc[i] += 2.0 * f[i];
          tmp[i] = y[i] + c * f[i];
        }
      }
    }
    eval(tmp_, f_);
    const double sixth = h / 6.0;
    for (int p = 0; p < 4; ++p) {
      double* y = y_[p].data();
      const double* f = f_[p].data();
      const double* acc = acc_[p].data();
      for (int i = 0; i < n; ++i) y[i] += sixth * (acc[i] + f[i]);
    }
  }

  void eval(const Planes& y, Planes& f) {
    scatter_occupations(y);
    coupling_fields();
    const double k = params_.k;
    const double* ar = y[0].data();
    const double* ai = y[1].data();
    const double* br = y[2].data();
    const double* bi = y[3].data();
    double* dar = f[0].data();
    double* dai = f[1].data();
    double* dbr = f[2].data();
    double* dbi = f[3].data();
    // i * (k C_other - J C_self)
    for (int r = 0; r < length_; ++r) {
      const int o = r * kColumns;
      const double* ja = j_a_.data() + (r + 1) * kWidth + 1;
      const double* jb = j_b_.data() + (r + 1) * kWidth + 1;
      for (int c = 0; c < kColumns; ++c) {
        const int i = o + c;
        dar[i] = ja[c] * ai[i] - k * bi[i];
        dai[i] = k * br[i] - ja[c] * ar[i];
        dbr[i] = jb[c] * bi[i] - k * ai[i];
        dbi[i] = k * ar[i] - jb[c] * br[i];
      }
    }
  }

  void scatter_occupations(const Planes& y) {
    for (int r = 0; r < length_; ++r) {
      double* pa = occ_a_.data() + kGuard + (r + 1) * kWidth;
      double* pb = occ_b_.data() + kGuard + (r + 1) * kWidth;
      const std::size_t o = static_cast<std::size_t>(r) * kColumns;
      const double* ar = y[0].data() + o;
      const double* ai = y[1].data() + o;
      const double* br = y[2].data() + o;
      const double* bi = y[3].data() + o;
      for (int c = 0; c < kColumns; ++c) {
        pa[c + 1] = ar[c] * ar[c] + ai[c] * ai[c];
        pb[c + 1] = br[c] * br[c] + bi[c] * bi[c];
      }
      pa[0] = pa[kColumns];
      pb[0] = pb[kColumns];
      pa[kColumns + 1] = pa[1];
      pb[kColumns + 1] = pb[1];
    }
  }

  // J over the whole padded interior block, one flat loop. Entries in the
  // halo columns are computed too and never read.
  void coupling_fields() {
    std::array<double, kDirections> vaa, vab, vba, vbb;
    for (int d = 0; d < kDirections; ++d) {
      vaa[d] = table_.v[d][0][0];
      vab[d] = table_.v[d][0][1];
      vba[d] = table_.v[d][1][0];
      vbb[d] = table_.v[d][1][1];
    }
    const double* __restrict pa = occ_a_.data() + kGuard;
    const double* __restrict pb = occ_b_.data() + kGuard;
    double* __restrict ja = j_a_.data();
    double* __restrict jb = j_b_.data();
    const int begin = kWidth;
    const int end = kWidth * (length_ + 1);
    for (int q = begin; q < end; ++q) {
      ja[q] = 0.0;
      jb[q] = 0.0;
    }
    // fixed neighbor order, so the sums are reproducible bit for bit
    for (int d = 0; d < kDirections; ++d) {
      const int off = offset_[d];
      const double a0 = vaa[d], a1 = vab[d], b0 = vba[d], b1 = vbb[d];
      for (int q = begin; q < end; ++q) {
        ja[q] += a0 * pa[q + off] + a1 * pb[q + off];
        jb[q] += b0 * pa[q + off] + b1 * pb[q + off];
      }
    }
  }

  int length_;
  EomParams params_;
  CouplingTable table_;
  std::array<int, kDirections> offset_{};
  std::vector<double> occ_a_, occ_b_;
  std::vector<double> j_a_, j_b_;
  Planes y_, f_, acc_, tmp_;
};

struct StateDerivative {
  std::vector<Complex> alpha;
  std::vector<Complex> beta;
};

inline StateDerivative derivative(const StateVector& s, const EomParams& params,
                                  const CouplingTable& table, const Lattice& lattice) {
  Propagator prop(lattice, table, params);
  StateDerivative out{std::vector<Complex>(s.sites()), std::vector<Complex>(s.sites())};
  prop.derivative(s.alpha, s.beta, out.alpha, out.beta);
  return out;
}

// Throws IntegrationFailure if any site norm leaves 1 by more than 1e-6.
inline StateVector rk4_step(const StateVector& s, const EomParams& params, const CouplingTable& table,
                            const Lattice& lattice) {
  Propagator prop(lattice, table, params);
  StateVector out = s;
  prop.step(out);
  if (const double drift = max_norm_drift(out); drift > Propagator::kDriftLimit)
    throw IntegrationFailure("norm drift " + std::to_string(drift) + " exceeds limit");
  return out;
}

inline double variational_energy(const StateVector& s, const EomParams& params,
                                 const CouplingTable& table, const Lattice& lattice) {
  Propagator prop(lattice, table, params);
  return prop.energy(s);
}

// Decoupled (Delta V = 0) solution for one tubulin:
//   C_a(t) = C_+ e^{-i W+ t} + C_- e^{-i W- t}
//   C_b(t) = C_+ e^{-i W+ t} - C_- e^{-i W- t}
// with C_+- = (C_a(0) +- C_b(0)) / 2 and W+- = J~ -+ k.
inline std::pair<Complex, Complex> mean_field_solution(Complex alpha0, Complex beta0, double mean_field,
                                                       double k, double t) {
  const Complex plus = 0.5 * (alpha0 + beta0);
  const Complex minus = 0.5 * (alpha0 - beta0);
  const Complex rot_plus = std::polar(1.0, -(mean_field - k) * t);
  const Complex rot_minus = std::polar(1.0, -(mean_field + k) * t);
  return {plus * rot_plus + minus * rot_minus, plus * rot_plus - minus * rot_minus};
}

// Whole-lattice version; `mean_field` holds J~ per site.
inline StateVector mean_field_solution(const StateVector& initial, std::span<const double> mean_field,
                                       double k, double t) {
  if (mean_field.size() != initial.alpha.size())
    throw std::invalid_argument("mean field size does not match the state");
  StateVector out = initial;
  for (int i = 0; i < initial.sites(); ++i) {
    std::tie(out.alpha[i], out.beta[i]) =
        mean_field_solution(initial.alpha[i], initial.beta[i], mean_field[i], k, t);
  }
  out.time = initial.time + t;
  return out;
}

}  // namespace mtsr
