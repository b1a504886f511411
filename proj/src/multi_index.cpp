#include "jetlab/multi_index.hpp"

#include <map>
#include <mutex>
#include <numeric>

#include "jetlab/error.hpp"

namespace jetlab {

int order(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

namespace {

void append_degree(std::vector<MultiIndex>& out, MultiIndex& cur, int pos, int remaining) {
  const int m = static_cast<int>(cur.size());
  if (pos == m - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    append_degree(out, cur, pos + 1, remaining - e);
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_multiindices(int m, int r) {
  require(m >= 1, "precondition", "enumerate_multiindices needs m >= 1");
  require(r >= 0, "precondition", "enumerate_multiindices needs r >= 0");
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(binomial(m + r, r)));
  MultiIndex cur(m, 0);
  for (int d = 0; d <= r; ++d) append_degree(out, cur, 0, d);
  return out;
}

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::shared_ptr<const Layout> Layout::get(int m, int r) {
  require(m >= 1 && r >= 0, "precondition", "layout needs m >= 1 and r >= 0");
  // Interning table: layouts are immutable, so sharing them is safe.
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const Layout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{m, r}];
  if (!slot) slot = std::shared_ptr<const Layout>(new Layout(m, r));
  return slot;
}

std::uint64_t Layout::key(const MultiIndex& alpha) const {
  std::uint64_t k = 0;
  for (int v = m_ - 1; v >= 0; --v) k = k * static_cast<std::uint64_t>(r_ + 1) + static_cast<std::uint64_t>(alpha[v]);
  return k;
}

Layout::Layout(int m, int r) : m_(m), r_(r) {
  double span = 1.0;
  for (int v = 0; v < m; ++v) span *= (r + 1);
  require(span < 9e18, "precondition", "(m, r) too large for the index table");

  indices_ = enumerate_multiindices(m, r);
  const std::size_t n = indices_.size();
  degree_.resize(n);
  degree_start_.assign(r + 2, n);
  alpha_factorial_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    degree_[i] = jetlab::order(indices_[i]);
    if (degree_start_[degree_[i]] == n) degree_start_[degree_[i]] = i;
    lookup_.emplace(key(indices_[i]), static_cast<int>(i));
    double f = 1.0;
    for (int e : indices_[i]) f *= factorial(e);
    alpha_factorial_[i] = f;
  }
  degree_start_[r + 1] = n;
  for (int d = r; d >= 0; --d)
    if (degree_start_[d] == n) degree_start_[d] = degree_start_[d + 1];

  raise_.assign(n * m, -1);
  lower_.assign(n * m, -1);
  MultiIndex tmp;
  for (std::size_t i = 0; i < n; ++i) {
    for (int v = 0; v < m; ++v) {
      tmp = indices_[i];
      tmp[v] += 1;
      raise_[i * m + v] = find(tmp);
      if (indices_[i][v] > 0) {
        tmp[v] -= 2;
        lower_[i * m + v] = find(tmp);
      }
    }
  }

  product_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    product_start_[i] = products_.size();
    const std::size_t jend = degree_start_[r - degree_[i] + 1];
    for (std::size_t j = 0; j < jend; ++j) {
      tmp = indices_[i];
      for (int v = 0; v < m; ++v) tmp[v] += indices_[j][v];
      products_.push_back({static_cast<int>(i), static_cast<int>(j), find(tmp)});
    }
  }
  product_start_[n] = products_.size();
}

int Layout::find(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != m_) return -1;
  int total = 0;
  for (int e : alpha) {
    if (e < 0) return -1;
    total += e;
  }
  if (total > r_) return -1;
  auto it = lookup_.find(key(alpha));
  return it == lookup_.end() ? -1 : it->second;
}

}  // namespace jetlab
