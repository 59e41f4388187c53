// Reset-zone detection, cluster labeling and the two self-reduction rules.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mtsr/dynamics.hpp"
#include "mtsr/lattice.hpp"
#include "mtsr/random.hpp"

namespace mtsr {

// A tubulin is "coherent enough" when p0 <= |C_a|^2 <= 1 - p0 (inclusive).
struct ResetZone {
  double p0 = 0.3;

  double p1() const { return 1.0 - p0; }
  bool contains(double occupation) const { return occupation >= p0 && occupation <= 1.0 - p0; }

  void validate() const {
    if (!(p0 > 0.0 && p0 < 0.5)) throw std::invalid_argument("reset zone P0 must lie in (0, 0.5)");
  }
};

using SiteMask = std::vector<std::uint8_t>;

inline SiteMask in_reset_zone(const StateVector& s, const ResetZone& zone) {
  SiteMask mask(s.sites());
  for (int i = 0; i < s.sites(); ++i) mask[i] = zone.contains(s.occupation(i)) ? 1 : 0;
  return mask;
}

struct Cluster {
  std::vector<int> sites;  // ascending

  int size() const { return static_cast<int>(sites.size()); }
  int first() const { return sites.front(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusterLabeling {
  std::vector<int> label;          // cluster index per site, -1 outside the zone
  std::vector<Cluster> clusters;   // ordered by smallest member site

  std::vector<int> sizes() const {
    std::vector<int> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) out.push_back(c.size());
    return out;
  }
};

// Hoshen-Kopelman labeling: one raster pass in site order that links every
// in-zone site to its already-visited in-zone neighbors through a union-find
// forest (path halving), then a relabeling pass. Buffers are reused between
// calls.
class ClusterLabeler {
 public:
  ClusterLabeling label(std::span<const std::uint8_t> mask, const Lattice& lattice) {
    check(mask, lattice);
    raster(mask, lattice);
    ClusterLabeling out;
    out.label.assign(mask.size(), -1);
    canon_.assign(parent_.size(), -1);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (provisional_[i] < 0) continue;
      const int root = find(provisional_[i]);
      if (canon_[root] < 0) {
        canon_[root] = static_cast<int>(out.clusters.size());
        out.clusters.emplace_back();
      }
      out.label[i] = canon_[root];
      out.clusters[canon_[root]].sites.push_back(static_cast<int>(i));
    }
    return out;
  }

  // Clusters of size >= min_size, ordered by smallest member. Skips the
  // relabeling of everything else.
  std::vector<Cluster> qualifying(std::span<const std::uint8_t> mask, const Lattice& lattice, int min_size) {
    check(mask, lattice);
    raster(mask, lattice);
    size_.assign(parent_.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (provisional_[i] >= 0) ++size_[find(provisional_[i])];
    std::vector<Cluster> out;
    canon_.assign(parent_.size(), -1);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (provisional_[i] < 0) continue;
      const int root = find(provisional_[i]);
      if (size_[root] < min_size) continue;
      if (canon_[root] < 0) {
        canon_[root] = static_cast<int>(out.size());
        out.emplace_back();
        out.back().sites.reserve(size_[root]);
      }
      out[canon_[root]].sites.push_back(static_cast<int>(i));
    }
    return out;
  }

 private:
  static void check(std::span<const std::uint8_t> mask, const Lattice& lattice) {
    if (static_cast<int>(mask.size()) != lattice.sites())
      throw std::invalid_argument("mask size does not match the lattice");
  }

  void raster(std::span<const std::uint8_t> mask, const Lattice& lattice) {
    provisional_.assign(mask.size(), -1);
    parent_.clear();
    for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
      if (!mask[i]) continue;
      int mine = -1;
      for (const Neighbor& n : lattice.neighbors(i)) {
        if (n.site >= i || provisional_[n.site] < 0) continue;
        const int r = find(provisional_[n.site]);
        if (mine < 0) {
          mine = r;
        } else if (r != mine) {
          const int lo = std::min(r, mine);
          parent_[std::max(r, mine)] = lo;
          mine = lo;
        }
      }
      if (mine < 0) {
        mine = static_cast<int>(parent_.size());
        parent_.push_back(mine);
      }
      provisional_[i] = mine;
    }
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::vector<int> provisional_;
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> canon_;
};

inline ClusterLabeling label_clusters(std::span<const std::uint8_t> mask, const Lattice& lattice) {
  ClusterLabeler labeler;
  return labeler.label(mask, lattice);
}

inline std::vector<Cluster> qualifying_clusters(const ClusterLabeling& labeling, int min_size) {
  if (min_size < 1) throw std::invalid_argument("cluster threshold N must be >= 1");
  std::vector<Cluster> out;
  for (const auto& c : labeling.clusters)
    if (c.size() >= min_size) out.push_back(c);
  return out;
}

enum class ReductionRule : std::uint8_t { Local, Global };

constexpr std::string_view name(ReductionRule r) { return r == ReductionRule::Local ? "LR" : "GR"; }

struct ReductionEvent {
  std::int64_t step = 0;
  double time = 0.0;  // t_R in t0
  ReductionRule rule = ReductionRule::Local;
  std::vector<int> sites;
  std::vector<std::uint8_t> to_alpha;  // per member: 1 -> |a>, 0 -> |b>

  int size() const { return static_cast<int>(sites.size()); }
  double alpha_fraction() const {
    if (sites.empty()) return 0.0;
    return static_cast<double>(std::count(to_alpha.begin(), to_alpha.end(), 1)) / sites.size();
  }
};

namespace detail {
inline double alpha_probability(const StateVector& s, int i) {
  const double a = std::norm(s.alpha[i]);
  return a / (a + std::norm(s.beta[i]));
}
}  // namespace detail

// Each member independently collapses to |a> with probability |C_a|^2.
inline ReductionEvent apply_local_reduction(StateVector& s, const Cluster& cluster, Rng& rng,
                                            std::int64_t step = 0) {
  if (cluster.sites.empty()) throw std::invalid_argument("cannot reduce an empty cluster");
  ReductionEvent ev{step, s.time, ReductionRule::Local, cluster.sites, {}};
  ev.to_alpha.reserve(cluster.sites.size());
  for (int i : cluster.sites) {
    const bool up = bernoulli(rng, detail::alpha_probability(s, i));
    s.set_pure(i, up ? Position::Alpha : Position::Beta);
    ev.to_alpha.push_back(up ? 1 : 0);
  }
  return ev;
}

// The whole cluster collapses to one common state, |a> with probability
// equal to the cluster mean of |C_a|^2.
inline ReductionEvent apply_global_reduction(StateVector& s, const Cluster& cluster, Rng& rng,
                                             std::int64_t step = 0) {
  if (cluster.sites.empty()) throw std::invalid_argument("cannot reduce an empty cluster");
  double mean = 0.0;
  for (int i : cluster.sites) mean += detail::alpha_probability(s, i);
  mean /= static_cast<double>(cluster.sites.size());
  const bool up = bernoulli(rng, mean);
  for (int i : cluster.sites) s.set_pure(i, up ? Position::Alpha : Position::Beta);
  return {step, s.time, ReductionRule::Global, cluster.sites,
          std::vector<std::uint8_t>(cluster.sites.size(), up ? 1 : 0)};
}

inline ReductionEvent apply_reduction(ReductionRule rule, StateVector& s, const Cluster& cluster, Rng& rng,
                                      std::int64_t step = 0) {
  return rule == ReductionRule::Local ? apply_local_reduction(s, cluster, rng, step)
                                      : apply_global_reduction(s, cluster, rng, step);
}

}  // namespace mtsr
