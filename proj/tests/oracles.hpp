// Slow, direct reference implementations used to check the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include "mtsr/dynamics.hpp"
#include "mtsr/lattice.hpp"

namespace oracle {

using mtsr::Complex;
using mtsr::CouplingTable;
using mtsr::Direction;
using mtsr::Lattice;
using mtsr::StateVector;

// Neighbor by explicit (column, row) arithmetic, independent of Lattice.
inline int neighbor(int site, Direction d, int length) {
  const int col = site % 13, row = site / 13;
  int c = col, r = row;
  switch (d) {
    case Direction::North: r += 1; break;
    case Direction::South: r -= 1; break;
    case Direction::UpperEast: c += 1; r += 1; break;
    case Direction::LowerEast: c += 1; break;
    case Direction::LowerWest: c -= 1; r -= 1; break;
    case Direction::UpperWest: c -= 1; break;
  }
  if (r < 0 || r >= length) return -1;
  c = (c + 13) % 13;
  return r * 13 + c;
}

// J_{i g} = sum over neighbors of V^{g a} |C_ja|^2 + V^{g b} |C_jb|^2.
inline double coupling_field(const StateVector& s, const CouplingTable& t, int length, int site, int g) {
  double sum = 0.0;
  for (Direction d : mtsr::kAllDirections) {
    const int j = neighbor(site, d, length);
    if (j < 0) continue;
    sum += t[d][g][0] * std::norm(s.alpha[j]) + t[d][g][1] * std::norm(s.beta[j]);
  }
  return sum;
}

// dC_ig/dt = i (k C_ig' - J_ig C_ig), complex arithmetic throughout.
inline void derivative(const StateVector& s, const CouplingTable& t, double k, int length,
                       std::vector<Complex>& da, std::vector<Complex>& db) {
  const Complex I(0.0, 1.0);
  const int n = s.sites();
  da.assign(n, 0.0);
  db.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double ja = coupling_field(s, t, length, i, 0);
    const double jb = coupling_field(s, t, length, i, 1);
    da[i] = I * (k * s.beta[i] - ja * s.alpha[i]);
    db[i] = I * (k * s.alpha[i] - jb * s.beta[i]);
  }
}

// E_v summed over bonds: each bond (i, j) once, plus the hopping term.
inline double energy(const StateVector& s, const CouplingTable& t, double k, int length) {
  double e = 0.0;
  for (int i = 0; i < s.sites(); ++i) e -= k * 2.0 * std::real(std::conj(s.alpha[i]) * s.beta[i]);
  for (int i = 0; i < s.sites(); ++i) {
    for (Direction d : {Direction::North, Direction::UpperEast, Direction::LowerEast}) {
      const int j = neighbor(i, d, length);
      if (j < 0) continue;
      const double pi[2] = {std::norm(s.alpha[i]), std::norm(s.beta[i])};
      const double pj[2] = {std::norm(s.alpha[j]), std::norm(s.beta[j])};
      for (int g = 0; g < 2; ++g)
        for (int h = 0; h < 2; ++h) e += pi[g] * t[d][g][h] * pj[h];
    }
  }
  return e;
}

// Exact evolution of one two-level system with H = [[ja, -k], [-k, jb]].
inline std::pair<Complex, Complex> two_level(Complex a0, Complex b0, double ja, double jb, double k, double t) {
  const double mean = 0.5 * (ja + jb);
  const double half = 0.5 * (ja - jb);
  const double w = std::hypot(half, k);
  const Complex I(0.0, 1.0);
  const Complex phase = std::exp(-I * mean * t);
  const double c = std::cos(w * t);
  const double sn = w > 0 ? std::sin(w * t) / w : t;
  // exp(-i t (half sz - k sx)) = cos(wt) - i sin(wt)/w (half sz - k sx)
  const Complex a = c * a0 - I * sn * (half * a0 - k * b0);
  const Complex b = c * b0 - I * sn * (-half * b0 - k * a0);
  return {phase * a, phase * b};
}

// Cluster sizes by breadth-first flood fill, sorted ascending.
inline std::vector<int> bfs_cluster_sizes(const std::vector<std::uint8_t>& mask, int length) {
  const int n = static_cast<int>(mask.size());
  std::vector<char> seen(n, 0);
  std::vector<int> sizes;
  for (int s = 0; s < n; ++s) {
    if (!mask[s] || seen[s]) continue;
    int count = 0;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      ++count;
      for (Direction d : mtsr::kAllDirections) {
        const int j = neighbor(i, d, length);
        if (j >= 0 && mask[j] && !seen[j]) {
          seen[j] = 1;
          q.push(j);
        }
      }
    }
    sizes.push_back(count);
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace oracle
