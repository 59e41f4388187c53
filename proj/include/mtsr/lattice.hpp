// Tubulin lattice: 13 protofilament columns wrapped into a cylinder, open
// along the microtubule axis. Each tubulin carries one mobile electron that
// sits either in the upper (alpha) or lower (beta) position.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mtsr {

inline constexpr int kColumns = 13;
inline constexpr int kDirections = 6;

// Neighbor directions in the unrolled lattice. East is the next column
// (c + 1 mod 13). The two east neighbors sit at rows r + 1 (upper) and r
// (lower); the west ones mirror them.
enum class Direction : std::uint8_t {
  North = 0,
  South = 1,
  UpperEast = 2,
  LowerEast = 3,
  LowerWest = 4,
  UpperWest = 5,
};

inline constexpr std::array<Direction, kDirections> kAllDirections = {
    Direction::North,     Direction::South,     Direction::UpperEast,
    Direction::LowerEast, Direction::LowerWest, Direction::UpperWest};

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::South: return Direction::North;
    case Direction::UpperEast: return Direction::LowerWest;
    case Direction::LowerEast: return Direction::UpperWest;
    case Direction::LowerWest: return Direction::UpperEast;
    case Direction::UpperWest: return Direction::LowerEast;
  }
  return d;
}

constexpr std::string_view name(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::South: return "S";
    case Direction::UpperEast: return "UE";
    case Direction::LowerEast: return "LE";
    case Direction::LowerWest: return "LW";
    case Direction::UpperWest: return "UW";
  }
  return "?";
}

constexpr int index(Direction d) { return static_cast<int>(d); }

// Row and column displacement of the neighbor in direction d.
constexpr std::array<int, 2> step_of(Direction d) {
  switch (d) {
    case Direction::North: return {0, 1};
    case Direction::South: return {0, -1};
    case Direction::UpperEast: return {1, 1};
    case Direction::LowerEast: return {1, 0};
    case Direction::LowerWest: return {-1, -1};
    case Direction::UpperWest: return {-1, 0};
  }
  return {0, 0};
}

// Electron position inside a tubulin.
enum class Position : std::uint8_t { Alpha = 0, Beta = 1 };

struct LatticeSpec {
  int length = 100;  // rows along the axis (L)

  constexpr int columns() const { return kColumns; }
  constexpr int sites() const { return kColumns * length; }
};

struct Neighbor {
  int site;
  Direction dir;
};

// Site i lives at column i % 13, row i / 13. Neighbor lists are stored in
// Direction order, missing (off-the-end) neighbors are omitted.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec) : spec_(spec) {
    if (spec.length < 1) throw std::invalid_argument("lattice length must be >= 1");
    const int n = spec.sites();
    offsets_.reserve(n + 1);
    neighbors_.reserve(static_cast<std::size_t>(n) * kDirections);
    offsets_.push_back(0);
    for (int i = 0; i < n; ++i) {
      for (Direction d : kAllDirections) {
        if (int j = neighbor(i, d); j >= 0) neighbors_.push_back({j, d});
      }
      offsets_.push_back(static_cast<int>(neighbors_.size()));
    }
  }

  const LatticeSpec& spec() const { return spec_; }
  int length() const { return spec_.length; }
  int sites() const { return spec_.sites(); }

  static constexpr int column(int site) { return site % kColumns; }
  static constexpr int row(int site) { return site / kColumns; }
  static constexpr int site(int col, int row) { return row * kColumns + col; }

  // Neighbor of `site` in direction d, or -1 past the open ends.
  int neighbor(int s, Direction d) const {
    const auto [dc, dr] = step_of(d);
    const int r = row(s) + dr;
    if (r < 0 || r >= spec_.length) return -1;
    const int c = (column(s) + dc + kColumns) % kColumns;
    return site(c, r);
  }

  std::span<const Neighbor> neighbors(int s) const {
    return {neighbors_.data() + offsets_[s],
            static_cast<std::size_t>(offsets_[s + 1] - offsets_[s])};
  }

  std::size_t edge_count() const { return neighbors_.size() / 2; }

 private:
  LatticeSpec spec_;
  std::vector<int> offsets_;
  std::vector<Neighbor> neighbors_;
};

// Planar geometry of the unrolled lattice, all lengths in nm. Alpha sits at
// +separation/2 and beta at -separation/2 along the column axis.
struct GeometryParams {
  double a_long = 8.0;       // row spacing along a column
  double a_trans = 5.0;      // column spacing
  double pitch_up = 4.9;     // axial offset of the upper-east neighbor
  double pitch_down = -3.1;  // axial offset of the lower-east neighbor
  double separation = 4.0;   // alpha-beta distance inside a tubulin

  void validate() const {
    if (!(a_long > 0 && a_trans > 0 && separation > 0))
      throw std::invalid_argument("geometry lengths must be positive");
    if (!(a_long > separation))
      throw std::invalid_argument("a_long must exceed the alpha-beta separation");
    if (std::abs(pitch_up - pitch_down - a_long) > 1e-9 * a_long)
      throw std::invalid_argument("pitch_up - pitch_down must equal a_long");
  }

  friend bool operator==(const GeometryParams&, const GeometryParams&) = default;

  // Center-to-center displacement (x, y) of the neighbor in direction d.
  std::array<double, 2> displacement(Direction d) const {
    switch (d) {
      case Direction::North: return {0.0, a_long};
      case Direction::South: return {0.0, -a_long};
      case Direction::UpperEast: return {a_trans, pitch_up};
      case Direction::LowerEast: return {a_trans, pitch_down};
      case Direction::LowerWest: return {-a_trans, -pitch_up};
      case Direction::UpperWest: return {-a_trans, -pitch_down};
    }
    return {0.0, 0.0};
  }
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

// Electron-electron potentials V^{gg'} (home position g, neighbor position
// g') per direction, in units of V0 = e^2 / (eps * 1 nm).
struct CouplingTable {
  std::array<Matrix2, kDirections> v{};

  const Matrix2& operator[](Direction d) const { return v[index(d)]; }
  Matrix2& operator[](Direction d) { return v[index(d)]; }

  double at(Direction d, Position home, Position other) const {
    return v[index(d)][static_cast<int>(home)][static_cast<int>(other)];
  }

  // V^{g alpha} - V^{g beta}
  double delta(Direction d, Position home) const {
    const auto& row = v[index(d)][static_cast<int>(home)];
    return row[0] - row[1];
  }

  CouplingTable scaled(double factor) const {
    CouplingTable out = *this;
    for (auto& m : out.v)
      for (auto& r : m)
        for (auto& x : r) x *= factor;
    return out;
  }

  // Opposite directions are related by swapping the position indices.
  bool opposite_symmetric(double tol = 0.0) const {
    for (Direction d : kAllDirections) {
      const auto& a = (*this)[d];
      const auto& b = (*this)[opposite(d)];
      for (int g = 0; g < 2; ++g)
        for (int h = 0; h < 2; ++h)
          if (std::abs(a[g][h] - b[h][g]) > tol) return false;
    }
    return true;
  }

  void validate() const {
    for (const auto& m : v)
      for (const auto& r : m)
        for (double x : r)
          if (!(x > 0) || !std::isfinite(x))
            throw std::invalid_argument("coupling potentials must be positive and finite");
  }

  friend bool operator==(const CouplingTable&, const CouplingTable&) = default;
};

// Builds a table from three independent directions; the opposite ones follow
// by index swap.
inline CouplingTable coupling_table_from(const Matrix2& north, const Matrix2& upper_east,
                                         const Matrix2& lower_east) {
  auto transpose = [](const Matrix2& m) {
    return Matrix2{{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}};
  };
  CouplingTable t;
  t[Direction::North] = north;
  t[Direction::South] = transpose(north);
  t[Direction::UpperEast] = upper_east;
  t[Direction::LowerWest] = transpose(upper_east);
  t[Direction::LowerEast] = lower_east;
  t[Direction::UpperWest] = transpose(lower_east);
  t.validate();
  return t;
}

inline double position_offset(const GeometryParams& g, Position p) {
  return p == Position::Alpha ? 0.5 * g.separation : -0.5 * g.separation;
}

// Distance in nm between the `home` site of a tubulin and the `other` site of
// its neighbor in direction d.
inline double site_distance(const GeometryParams& g, Direction d, Position home, Position other) {
  const auto [dx, dy] = g.displacement(d);
  const double y = dy + position_offset(g, other) - position_offset(g, home);
  return std::hypot(dx, y);
}

// V^{gg'} = (1 nm) / R^{gg'} in units of V0.
inline CouplingTable compute_coupling_table(const GeometryParams& g) {
  g.validate();
  CouplingTable t;
  for (Direction d : kAllDirections) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double r = site_distance(g, d, Position(a), Position(b));
        if (!(r > 0)) throw std::invalid_argument("geometry puts two electron sites on top of each other");
        t[d][a][b] = 1.0 / r;
      }
    }
  }
  return t;
}

// Ising couplings and field of the equivalent spin-1/2 model (hbar = 1).
struct SpinCouplings {
  std::array<double, kDirections> j{};
  double b_x = 0.0;
  double b_y = 0.0;
  double b_z = 0.0;  // for a site with all six neighbors present

  double operator[](Direction d) const { return j[index(d)]; }
};

inline SpinCouplings spin_couplings(const CouplingTable& t, double k) {
  SpinCouplings s;
  double bz = 0.0;
  for (Direction d : kAllDirections) {
    const auto& m = t[d];
    s.j[index(d)] = -(m[0][0] - m[0][1] - m[1][0] + m[1][1]);
    bz += m[0][0] + m[0][1] - m[1][0] - m[1][1];
  }
  s.b_x = 2.0 * k;
  s.b_z = -0.5 * bz;
  return s;
}

// Mean-field limit: per direction and home position, V^{g alpha} and
// V^{g beta} are replaced by their average, which removes Delta V.
inline CouplingTable symmetrize(const CouplingTable& t) {
  CouplingTable out = t;
  for (auto& m : out.v) {
    for (auto& r : m) {
      const double mean = 0.5 * (r[0] + r[1]);
      r[0] = mean;
      r[1] = mean;
    }
  }
  return out;
}

// Average of |Delta V^g| / (V^{g alpha} + V^{g beta}) over directions and g.
inline double delta_v_ratio(const CouplingTable& t) {
  double sum = 0.0;
  for (Direction d : kAllDirections)
    for (int g = 0; g < 2; ++g)
      sum += std::abs(t[d][g][0] - t[d][g][1]) / (t[d][g][0] + t[d][g][1]);
  return sum / (2 * kDirections);
}

// (1/2) sum over the neighbors present at `site` of (V^{g alpha} + V^{g beta}).
inline double site_mean_field(const CouplingTable& t, const Lattice& lat, int site, Position home) {
  const int g = static_cast<int>(home);
  double sum = 0.0;
  for (const Neighbor& n : lat.neighbors(site)) sum += 0.5 * (t[n.dir][g][0] + t[n.dir][g][1]);
  return sum;
}

// Same sum for a site with all six neighbors.
inline double bulk_mean_field(const CouplingTable& t, Position home) {
  const int g = static_cast<int>(home);
  double sum = 0.0;
  for (Direction d : kAllDirections) sum += 0.5 * (t[d][g][0] + t[d][g][1]);
  return sum;
}

}  // namespace mtsr
