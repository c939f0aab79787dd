#include <algorithm>
#include <cmath>

#include "totopo/error.hpp"
#include "totopo/persistence.hpp"

namespace totopo {

namespace {

// Bipartite graph with left = A ∪ proj(B), right = B ∪ proj(A). Left node
// a_i (i < na) connects to b_j when their L∞ distance is within delta and to
// its own diagonal projection when half its lifetime is; proj(b_j) connects to
// b_j likewise and to every proj(a_i) at no cost.
class DeltaMatching {
 public:
  DeltaMatching(const std::vector<PersistencePoint>& a, const std::vector<PersistencePoint>& b)
      : a_(a), b_(b), size_(a.size() + b.size()) {}

  bool perfect(double delta) {
    delta_ = delta;
    match_right_.assign(size_, npos);
    for (std::size_t u = 0; u < size_; ++u) {
      seen_.assign(size_, 0);
      if (!augment(u)) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool adjacent(std::size_t u, std::size_t v) const {
    const std::size_t na = a_.size();
    const std::size_t nb = b_.size();
    const bool u_real = u < na;
    const bool v_real = v < nb;
    if (u_real && v_real) return linf(a_[u], b_[v]) <= delta_;
    if (u_real) return v - nb == u && half_life(a_[u]) <= delta_;
    if (v_real) return u - na == v && half_life(b_[v]) <= delta_;
    return true;
  }

  bool augment(std::size_t u) {
    for (std::size_t v = 0; v < size_; ++v) {
      if (seen_[v] || !adjacent(u, v)) continue;
      seen_[v] = 1;
      if (match_right_[v] == npos || augment(match_right_[v])) {
        match_right_[v] = u;
        return true;
      }
    }
    return false;
  }

  const std::vector<PersistencePoint>& a_;
  const std::vector<PersistencePoint>& b_;
  std::size_t size_;
  double delta_ = 0.0;
  std::vector<std::size_t> match_right_;
  std::vector<char> seen_;

 public:
  static double linf(const PersistencePoint& p, const PersistencePoint& q) {
    return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
  }
  static double half_life(const PersistencePoint& p) { return (p.death - p.birth) / 2.0; }
};

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  const auto pa = a.in_dim(dim);
  const auto pb = b.in_dim(dim);
  for (const auto* side : {&pa, &pb}) {
    for (const auto& p : *side) {
      if (!std::isfinite(p.birth) || !std::isfinite(p.death))
        throw ContractError("bottleneck_distance needs finite diagrams");
    }
  }
  if (pa.empty() && pb.empty()) return 0.0;

  // The optimum is one of the edge costs; binary search over them.
  std::vector<double> candidates{0.0};
  for (const auto& p : pa) candidates.push_back(DeltaMatching::half_life(p));
  for (const auto& q : pb) candidates.push_back(DeltaMatching::half_life(q));
  for (const auto& p : pa) {
    for (const auto& q : pb) candidates.push_back(DeltaMatching::linf(p, q));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  DeltaMatching matching(pa, pb);
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (matching.perfect(candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace totopo
