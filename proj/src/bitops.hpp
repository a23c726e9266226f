#pragma once

// Word-level helpers shared by the schedulers and the bound builder.

#include <bit>
#include <cstdint>
#include <vector>

#include "fltorrent/rng.hpp"
#include "fltorrent/types.hpp"

namespace fltorrent::detail {

inline void or_into(Bitset& dst, const Bitset& src) {
  auto& d = dst.words();
  const auto& s = src.words();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] |= s[i];
}

// dst |= src with bits [lo, hi) of src ignored.
inline void or_into_except(Bitset& dst, const Bitset& src, int lo, int hi) {
  auto& d = dst.words();
  const auto& s = src.words();
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::uint64_t w = s[i];
    const int b = static_cast<int>(i) * 64;
    if (hi > b && lo < b + 64) {
      const int a = lo > b ? lo - b : 0, e = hi < b + 64 ? hi - b : 64;
      const std::uint64_t hi_mask = e == 64 ? ~0ULL : (1ULL << e) - 1;
      w &= ~(hi_mask & ~((1ULL << a) - 1));
    }
    d[i] |= w;
  }
}

inline void andnot_into(Bitset& dst, const Bitset& src) {
  auto& d = dst.words();
  const auto& s = src.words();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] &= ~s[i];
}

inline void clear_range(Bitset& b, int lo, int hi) {
  for (int i = lo; i < hi; ++i) b.reset(i);
}

inline int count_andnot(const Bitset& a, const Bitset& b) {
  int c = 0;
  const auto& x = a.words();
  const auto& y = b.words();
  for (std::size_t i = 0; i < x.size(); ++i) c += std::popcount(x[i] & ~y[i]);
  return c;
}

// Index of the r-th (0-based) set bit of (a & ~b), or -1.
inline int select_andnot(const Bitset& a, const Bitset* b, int r) {
  const auto& x = a.words();
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t w = b ? (x[i] & ~b->words()[i]) : x[i];
    const int pc = std::popcount(w);
    if (r < pc) {
      for (int k = 0; k < r; ++k) w &= w - 1;
      return static_cast<int>(i * 64 + std::countr_zero(w));
    }
    r -= pc;
  }
  return -1;
}

// Fenwick tree over non-negative weights with weighted sampling.
class Fenwick {
 public:
  explicit Fenwick(int n = 0) : t_(n + 1, 0), n_(n) {}
  void add(int i, std::int64_t d) {
    for (++i; i <= n_; i += i & -i) t_[i] += d;
  }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (int i = n_; i > 0; i -= i & -i) s += t_[i];
    return s;
  }
  // Smallest i with prefix(i) > r; r is left as the offset inside element i.
  int find(std::int64_t& r) const {
    int pos = 0;
    int step = std::bit_floor(static_cast<unsigned>(n_ ? n_ : 1));
    for (; step; step >>= 1) {
      if (pos + step <= n_ && t_[pos + step] <= r) {
        pos += step;
        r -= t_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<std::int64_t> t_;
  int n_;
};

// Draws (receiver, chunk) pairs uniformly without replacement, i.e. walks a
// uniformly random permutation of all pairs lazily. Receivers can be retired.
class RequestPool {
 public:
  explicit RequestPool(std::vector<Bitset> sets) : rem_(std::move(sets)), cnt_(rem_.size(), 0), fw_(static_cast<int>(rem_.size())) {
    for (std::size_t v = 0; v < rem_.size(); ++v) {
      cnt_[v] = rem_[v].count();
      fw_.add(static_cast<int>(v), cnt_[v]);
      total_ += cnt_[v];
    }
  }

  bool empty() const { return total_ == 0; }

  // Returns false when exhausted.
  bool draw(Rng& rng, NodeId& w, ChunkIndex& c) {
    if (total_ == 0) return false;
    auto r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total_)));
    w = fw_.find(r);
    c = select_andnot(rem_[w], nullptr, static_cast<int>(r));
    rem_[w].reset(c);
    --cnt_[w];
    --total_;
    fw_.add(w, -1);
    return true;
  }

  void retire(NodeId w) {
    if (cnt_[w] == 0) return;
    fw_.add(w, -cnt_[w]);
    total_ -= cnt_[w];
    cnt_[w] = 0;
  }

  int remaining(NodeId w) const { return cnt_[w]; }

 private:
  std::vector<Bitset> rem_;
  std::vector<int> cnt_;
  Fenwick fw_;
  std::int64_t total_ = 0;
};

}  // namespace fltorrent::detail
