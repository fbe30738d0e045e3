#pragma once

// Word Mover's Distance as an exact transportation problem.
//
// Two texts become normalized bag-of-words distributions (nBOW) over their
// in-vocabulary words. The distance is the minimum of sum_ij T_ij c(i,j) over
// non-negative flows T whose row sums equal the first text's masses and whose
// column sums equal the second's, with c the Euclidean distance between word
// vectors. solve_transport() finds an optimal vertex with the transportation
// simplex (MODI / u-v method) on a spanning-tree basis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "uwsd/embedding.hpp"
#include "uwsd/error.hpp"

namespace uwsd {

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TransportPlan {
  Matrix flow;
  double cost = 0.0;
  std::size_t iterations = 0;  // simplex pivots performed
};

struct TransportOptions {
  // Pivot limit; 0 picks a size-dependent default.
  std::size_t max_iterations = 0;
  // After this many consecutive degenerate pivots, entering/leaving choices
  // switch to Bland's smallest-index rule until progress resumes.
  std::size_t degenerate_limit = 32;
};

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::schema, "euclidean_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace detail {

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, const Matrix& cost,
                   const TransportOptions& options)
      : n_(supply.size()), m_(demand.size()), supply_(supply), demand_(demand), cost_(cost),
        flow_(n_, m_), cell_to_basis_(n_ * m_, kNone), options_(options) {
    double scale = 0.0;
    for (double c : cost_.data) scale = std::max(scale, std::abs(c));
    tolerance_ = 1e-11 * std::max(scale, 1e-300);
    if (options_.max_iterations == 0) options_.max_iterations = 1000 + 50 * n_ * m_;
  }

  TransportPlan run() {
    northwest_corner();
    std::size_t iterations = 0;
    std::size_t degenerate_run = 0;
    std::vector<double> u(n_), v(m_);
    while (true) {
      compute_potentials(u, v);
      const bool bland = degenerate_run >= options_.degenerate_limit;
      const std::size_t entering = choose_entering(u, v, bland);
      if (entering == kNone) break;
      if (++iterations > options_.max_iterations)
        throw Error(ErrorKind::numeric, "transportation simplex did not converge after " +
                                            std::to_string(options_.max_iterations) + " pivots (" +
                                            std::to_string(n_) + "x" + std::to_string(m_) + " problem)");
      const double theta = pivot(entering, bland);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }

    TransportPlan plan;
    plan.flow = flow_;
    plan.iterations = iterations;
    for (std::size_t k = 0; k < flow_.data.size(); ++k) plan.cost += flow_.data[k] * cost_.data[k];
    return plan;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Tree nodes: rows are 0..n-1, columns are n..n+m-1. Each basic cell (i,j)
  // is an edge between row node i and column node n+j.
  std::size_t row_of(std::size_t cell) const { return cell / m_; }
  std::size_t col_of(std::size_t cell) const { return cell % m_; }

  void add_basic(std::size_t cell) {
    cell_to_basis_[cell] = basis_.size();
    basis_.push_back(cell);
  }

  // Staircase start: always advances exactly one of row/column, so it yields
  // n+m-1 basic cells forming a spanning tree even when some flows are zero.
  void northwest_corner() {
    std::vector<double> row_left(supply_.begin(), supply_.end());
    std::vector<double> col_left(demand_.begin(), demand_.end());
    std::size_t i = 0, j = 0;
    while (true) {
      const double x = std::max(0.0, std::min(row_left[i], col_left[j]));
      flow_(i, j) = x;
      add_basic(i * m_ + j);
      if (i == n_ - 1 && j == m_ - 1) break;
      const bool row_done = row_left[i] <= col_left[j];
      row_left[i] -= x;
      col_left[j] -= x;
      if (i == n_ - 1) ++j;
      else if (j == m_ - 1) ++i;
      else if (row_done) ++i;
      else ++j;
    }
  }

  void build_adjacency() {
    adjacency_.assign(n_ + m_, {});
    for (std::size_t cell : basis_) {
      adjacency_[row_of(cell)].push_back(cell);
      adjacency_[n_ + col_of(cell)].push_back(cell);
    }
  }

  std::size_t other_end(std::size_t cell, std::size_t node) const {
    return node < n_ ? n_ + col_of(cell) : row_of(cell);
  }

  // u_i + v_j = c_ij on every basic cell, anchored at u_0 = 0.
  void compute_potentials(std::vector<double>& u, std::vector<double>& v) {
    build_adjacency();
    std::vector<char> seen(n_ + m_, 0);
    std::vector<std::size_t> stack = {0};
    seen[0] = 1;
    u[0] = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t cell : adjacency_[node]) {
        const std::size_t next = other_end(cell, node);
        if (seen[next]) continue;
        seen[next] = 1;
        const double c = cost_(row_of(cell), col_of(cell));
        if (next < n_) u[next] = c - v[col_of(cell)];
        else v[next - n_] = c - u[row_of(cell)];
        stack.push_back(next);
      }
    }
  }

  std::size_t choose_entering(const std::vector<double>& u, const std::vector<double>& v, bool bland) const {
    std::size_t best = kNone;
    double best_reduced = -tolerance_;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const std::size_t cell = i * m_ + j;
        if (cell_to_basis_[cell] != kNone) continue;
        const double reduced = cost_(i, j) - u[i] - v[j];
        if (reduced < best_reduced) {
          best = cell;
          best_reduced = reduced;
          if (bland) return best;
        }
      }
    }
    return best;
  }

  // Tree path from column node of the entering cell to its row node.
  std::vector<std::size_t> tree_path(std::size_t from, std::size_t to) const {
    std::vector<std::size_t> via(n_ + m_, kNone);
    std::vector<char> seen(n_ + m_, 0);
    std::vector<std::size_t> queue = {from};
    seen[from] = 1;
    for (std::size_t head = 0; head < queue.size() && !seen[to]; ++head) {
      const std::size_t node = queue[head];
      for (std::size_t cell : adjacency_[node]) {
        const std::size_t next = other_end(cell, node);
        if (seen[next]) continue;
        seen[next] = 1;
        via[next] = cell;
        queue.push_back(next);
      }
    }
    if (!seen[to]) throw Error(ErrorKind::numeric, "transportation simplex basis is not a spanning tree");
    std::vector<std::size_t> path;  // cells, ordered from `to` back to `from`
    for (std::size_t node = to; node != from;) {
      const std::size_t cell = via[node];
      path.push_back(cell);
      node = other_end(cell, node);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Moves theta units around the cycle closed by the entering cell and
  // returns theta.
  double pivot(std::size_t entering, bool bland) {
    const std::size_t i = row_of(entering);
    const std::size_t j = col_of(entering);
    // Path edges alternate -, +, -, ... starting at column j and ending at row i.
    const auto path = tree_path(n_ + j, i);

    std::size_t leaving = kNone;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const std::size_t cell = path[k];
      const double f = flow_.data[cell];
      if (f < theta || (f == theta && bland && cell < leaving)) {
        theta = f;
        leaving = cell;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      double& f = flow_.data[path[k]];
      f = (k % 2 == 0) ? f - theta : f + theta;
    }
    flow_.data[leaving] = 0.0;
    flow_.data[entering] = theta;

    const std::size_t slot = cell_to_basis_[leaving];
    cell_to_basis_[leaving] = kNone;
    basis_[slot] = entering;
    cell_to_basis_[entering] = slot;
    return theta;
  }

  std::size_t n_, m_;
  std::span<const double> supply_, demand_;
  const Matrix& cost_;
  Matrix flow_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> cell_to_basis_;
  std::vector<std::vector<std::size_t>> adjacency_;
  TransportOptions options_;
  double tolerance_ = 0.0;
};

inline void validate_masses(std::span<const double> masses, const char* side) {
  if (masses.empty()) throw Error(ErrorKind::schema, std::string(side) + " distribution is empty");
  for (double x : masses)
    if (!std::isfinite(x) || x < 0.0)
      throw Error(ErrorKind::numeric, std::string(side) + " distribution has a negative or non-finite mass");
}

}  // namespace detail

// Exact optimal transport between `supply` (rows) and `demand` (columns).
// Both must be non-negative with equal totals (within 1e-9 relative).
inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     const Matrix& cost, const TransportOptions& options = {}) {
  detail::validate_masses(supply, "supply");
  detail::validate_masses(demand, "demand");
  if (cost.rows != supply.size() || cost.cols != demand.size())
    throw Error(ErrorKind::schema, "cost matrix is " + std::to_string(cost.rows) + "x" + std::to_string(cost.cols) +
                                       ", expected " + std::to_string(supply.size()) + "x" +
                                       std::to_string(demand.size()));
  for (double c : cost.data)
    if (!std::isfinite(c)) throw Error(ErrorKind::numeric, "cost matrix has non-finite entries");
  double total_supply = 0.0, total_demand = 0.0;
  for (double x : supply) total_supply += x;
  for (double x : demand) total_demand += x;
  if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply))
    throw Error(ErrorKind::schema, "supply and demand totals differ");

  // A single source or sink admits exactly one feasible plan.
  if (supply.size() == 1 || demand.size() == 1) {
    TransportPlan plan;
    plan.flow = Matrix(supply.size(), demand.size());
    for (std::size_t i = 0; i < supply.size(); ++i)
      for (std::size_t j = 0; j < demand.size(); ++j) {
        plan.flow(i, j) = supply.size() == 1 ? demand[j] : supply[i];
        plan.cost += plan.flow(i, j) * cost(i, j);
      }
    return plan;
  }
  return detail::TransportSimplex(supply, demand, cost, options).run();
}

// ---------------------------------------------------------------------------
// Documents

struct NBowDoc {
  std::vector<std::string> words;  // unique, first-occurrence order
  std::vector<double> mass;        // normalized term frequencies
  std::vector<Vector> vectors;
  std::size_t dropped = 0;         // out-of-vocabulary tokens skipped

  std::size_t size() const { return words.size(); }
};

// Duplicate tokens (including case variants that resolve to the same table
// entry) are merged; their counts become the masses.
inline NBowDoc build_nbow(std::span<const std::string> tokens, const WordVectorTable& table) {
  NBowDoc doc;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> counts;
  for (const auto& t : tokens) {
    auto key = table.resolve(t);
    if (!key) {
      ++doc.dropped;
      continue;
    }
    auto [it, inserted] = index.emplace(*key, doc.words.size());
    if (inserted) {
      doc.words.push_back(*key);
      doc.vectors.push_back(table.at(*key));
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
  }
  if (doc.words.empty()) throw Error(ErrorKind::coverage, "all " + std::to_string(tokens.size()) + " tokens are out of vocabulary");
  double total = 0.0;
  for (double c : counts) total += c;
  for (double c : counts) doc.mass.push_back(c / total);
  return doc;
}

inline Matrix ground_cost(const NBowDoc& x, const NBowDoc& y) {
  if (!x.vectors.empty() && !y.vectors.empty() && x.vectors.front().size() != y.vectors.front().size())
    throw Error(ErrorKind::schema, "ground_cost: word vector dimensions differ");
  Matrix c(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) c(i, j) = euclidean_distance(x.vectors[i], y.vectors[j]);
  return c;
}

inline TransportPlan solve_wmd(const NBowDoc& x, const NBowDoc& y, const TransportOptions& options = {}) {
  const Matrix cost = ground_cost(x, y);
  if (x.size() == 1 && y.size() == 1) {
    TransportPlan plan;
    plan.flow = Matrix(1, 1, 1.0);
    plan.cost = cost(0, 0);
    return plan;
  }
  return solve_transport(x.mass, y.mass, cost, options);
}

// Negated distance, so that the best sense is the one with the highest score.
inline double wmd_similarity(const NBowDoc& x, const NBowDoc& y) { return -solve_wmd(x, y).cost; }

}  // namespace uwsd
