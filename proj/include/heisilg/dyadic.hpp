#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace heisilg {

// Half-open dyadic interval [m 2^-j, (m + 1) 2^-j).
struct DyadicInterval {
  int j = 0;
  std::int64_t m = 0;

  double length() const { return std::ldexp(1.0, -j); }
  double lo() const { return std::ldexp(static_cast<double>(m), -j); }
  double hi() const { return std::ldexp(static_cast<double>(m + 1), -j); }
  double mid() const { return std::ldexp(static_cast<double>(2 * m + 1), -j - 1); }

  // 2Q: same midpoint, twice the length.
  double lo2() const { return lo() - 0.5 * length(); }
  double hi2() const { return hi() + 0.5 * length(); }
  // Q/2: same midpoint, half the length.
  double lo_half() const { return lo() + 0.25 * length(); }
  double hi_half() const { return hi() - 0.25 * length(); }

  DyadicInterval left() const { return {j + 1, 2 * m}; }
  DyadicInterval right() const { return {j + 1, 2 * m + 1}; }
  DyadicInterval parent() const { return {j - 1, m >= 0 ? m / 2 : -((-m + 1) / 2)}; }

  bool contains(const DyadicInterval& q) const {
    if (q.j < j) return false;
    const std::int64_t shifted = q.m >> (q.j - j);
    return shifted == m;
  }

  // 17 equally spaced points of 2Q, endpoints included.
  std::vector<double> samples2() const {
    std::vector<double> s(17);
    const double a = lo2(), step = 2.0 * length() / 16.0;
    for (int i = 0; i < 17; ++i) s[i] = a + step * i;
    return s;
  }

  auto operator<=>(const DyadicInterval&) const = default;
};

inline std::string to_string(const DyadicInterval& q) {
  return "(" + std::to_string(q.j) + "," + std::to_string(q.m) + ")";
}

// Dyadic subintervals of a root down to `depth` levels below it.
struct DyadicGrid {
  DyadicInterval root;
  int depth = 0;

  std::vector<DyadicInterval> all() const {
    std::vector<DyadicInterval> out;
    for (int l = 0; l <= depth; ++l) {
      const std::int64_t first = root.m << l;
      for (std::int64_t i = 0; i < (std::int64_t{1} << l); ++i) out.push_back({root.j + l, first + i});
    }
    return out;
  }

  bool in_grid(const DyadicInterval& q) const { return q.j <= root.j + depth && root.contains(q); }
  bool at_bottom(const DyadicInterval& q) const { return q.j == root.j + depth; }
};

// Stopping-time tree: members below a top interval, closed under taking
// ancestors up to the top, with both or neither child present.
class Tree {
 public:
  Tree() = default;
  Tree(DyadicInterval top, std::set<DyadicInterval> members)
      : top_(top), members_(std::move(members)) {}

  const DyadicInterval& top() const { return top_; }
  const std::set<DyadicInterval>& members() const { return members_; }
  bool contains(const DyadicInterval& q) const { return members_.count(q) > 0; }

  // Members without children in the tree, ordered left to right.
  std::vector<DyadicInterval> minimal() const {
    std::vector<DyadicInterval> out;
    for (const auto& q : members_) {
      if (!contains(q.left())) out.push_back(q);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lo() < b.lo(); });
    return out;
  }

  // Empty string when coherent, otherwise the violated property.
  std::string coherence_violation() const {
    if (!contains(top_)) return "T1: top is not a member";
    for (const auto& q : members_) {
      if (!top_.contains(q)) return "T1: member " + to_string(q) + " outside the top";
      if (q != top_ && !contains(q.parent())) return "T2: parent of " + to_string(q) + " missing";
      if (contains(q.left()) != contains(q.right())) return "T3: " + to_string(q) + " has one child";
    }
    return {};
  }

 private:
  DyadicInterval top_;
  std::set<DyadicInterval> members_;
};

// Partition of a truncated dyadic grid into bad intervals and trees.
struct Coronization {
  DyadicGrid grid;
  std::vector<DyadicInterval> bad;
  std::vector<Tree> trees;
  double packing_constant = 0.0;

  // Empty string when every grid interval lies in exactly one of B or a tree.
  std::string partition_violation() const {
    std::set<DyadicInterval> seen;
    auto claim = [&](const DyadicInterval& q) -> std::string {
      if (!grid.in_grid(q)) return "interval " + to_string(q) + " outside the grid";
      if (!seen.insert(q).second) return "interval " + to_string(q) + " claimed twice";
      return {};
    };
    for (const auto& q : bad) {
      if (auto e = claim(q); !e.empty()) return e;
    }
    for (const auto& t : trees) {
      for (const auto& q : t.members()) {
        if (auto e = claim(q); !e.empty()) return e;
      }
    }
    for (const auto& q : grid.all()) {
      if (!seen.count(q)) return "interval " + to_string(q) + " not covered";
    }
    return {};
  }
};

// Sum of |Q| over members of the collection contained in Q0.
inline double carleson_sum(const std::vector<DyadicInterval>& collection, const DyadicInterval& q0) {
  double s = 0.0;
  for (const auto& q : collection) {
    if (q0.contains(q)) s += q.length();
  }
  return s;
}

// max over grid intervals Q0 of (sum of |Q| over bad Q in Q0 plus |Q(T)| over
// tops in Q0) / |Q0|.
inline double measure_packing(const Coronization& c) {
  std::set<DyadicInterval> marked(c.bad.begin(), c.bad.end());
  for (const auto& t : c.trees) marked.insert(t.top());
  const int J = c.grid.depth;
  // weight[l][i] for interval (root.j + l, root.m * 2^l + i), accumulated bottom-up.
  std::vector<std::vector<double>> acc(J + 1);
  for (int l = J; l >= 0; --l) {
    const std::int64_t count = std::int64_t{1} << l;
    acc[l].assign(static_cast<std::size_t>(count), 0.0);
    for (std::int64_t i = 0; i < count; ++i) {
      const DyadicInterval q{c.grid.root.j + l, (c.grid.root.m << l) + i};
      double w = marked.count(q) ? q.length() : 0.0;
      if (l < J) w += acc[l + 1][2 * i] + acc[l + 1][2 * i + 1];
      acc[l][i] = w;
    }
  }
  double best = 0.0;
  for (int l = 0; l <= J; ++l) {
    const double len = std::ldexp(c.grid.root.length(), -l);
    for (double w : acc[l]) best = std::max(best, w / len);
  }
  return best;
}

}  // namespace heisilg
