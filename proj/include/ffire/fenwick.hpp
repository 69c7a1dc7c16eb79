#ifndef FFIRE_FENWICK_HPP
#define FFIRE_FENWICK_HPP

#include <cstdint>
#include <vector>

namespace ffire {

// Binary indexed tree over slot weights, with prefix-search for weighted
// sampling. Indices are 0-based externally, 1-based internally.
class Fenwick {
  public:
    explicit Fenwick(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        n_ = n;
        tree_.assign(n + 1, 0);
        total_ = 0;
        log2_ = 0;
        while ((std::size_t{1} << (log2_ + 1)) <= n_) ++log2_;
    }

    /// Build from equal weights w (O(n)).
    void fill(std::int64_t w) {
        for (std::size_t i = 1; i <= n_; ++i) tree_[i] = 0;
        for (std::size_t i = 1; i <= n_; ++i) {
            tree_[i] += w;
            const std::size_t j = i + (i & (~i + 1));
            if (j <= n_) tree_[j] += tree_[i];
        }
        total_ = static_cast<std::int64_t>(n_) * w;
    }

    void add(std::size_t idx, std::int64_t delta) {
        total_ += delta;
        for (std::size_t i = idx + 1; i <= n_; i += i & (~i + 1)) tree_[i] += delta;
    }

    std::int64_t total() const { return total_; }

    /// Smallest idx with prefix_sum(idx) > u, for u in [0, total).
    std::size_t find(std::int64_t u) const {
        std::size_t pos = 0;
        for (std::size_t step = std::size_t{1} << log2_; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next <= n_ && tree_[next] <= u) {
                pos = next;
                u -= tree_[next];
            }
        }
        return pos;  // 0-based
    }

  private:
    std::size_t n_ = 0;
    unsigned log2_ = 0;
    std::int64_t total_ = 0;
    std::vector<std::int64_t> tree_;
};

}  // namespace ffire

#endif
