#include "gedkit/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace gedkit {

namespace {

void check_input(const std::vector<double>& cost, int n) {
  if (n < 0) throw std::invalid_argument("assignment: n must be >= 0");
  if (cost.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("assignment: cost matrix must be n*n");
}

double objective(const std::vector<double>& cost, int n, const std::vector<int>& sol) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost[static_cast<std::size_t>(i) * n + sol[i]];
  return total;
}

}  // namespace

AssignmentResult solve_assignment_hungarian(const std::vector<double>& cost, int n) {
  check_input(cost, n);
  if (n == 0) return {};
  const double kInf = std::numeric_limits<double>::max();

  // Kuhn-Munkres with row/column potentials, 1-indexed internally.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult res;
  res.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) res.row_to_col[p[j] - 1] = j - 1;
  res.cost = objective(cost, n, res.row_to_col);
  return res;
}

AssignmentResult solve_assignment_jv(const std::vector<double>& cost, int n) {
  check_input(cost, n);
  if (n == 0) return {};
  auto c = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };

  std::vector<int> rowsol(n, -1), colsol(n, -1);
  std::vector<double> v(n, 0.0);
  std::vector<int> free_rows;
  free_rows.reserve(n);

  // Column reduction, reverse column order.
  {
    std::vector<int> matches(n, 0);
    for (int j = n - 1; j >= 0; --j) {
      double minc = c(0, j);
      int imin = 0;
      for (int i = 1; i < n; ++i)
        if (c(i, j) < minc) {
          minc = c(i, j);
          imin = i;
        }
      v[j] = minc;
      if (++matches[imin] == 1) {
        rowsol[imin] = j;
        colsol[j] = imin;
      } else {
        colsol[j] = -1;
      }
    }

    // Reduction transfer for rows assigned exactly once.
    for (int i = 0; i < n; ++i) {
      if (matches[i] == 0) {
        free_rows.push_back(i);
      } else if (matches[i] == 1) {
        int j1 = rowsol[i];
        double m = std::numeric_limits<double>::max();
        for (int j = 0; j < n; ++j)
          if (j != j1) m = std::min(m, c(i, j) - v[j]);
        if (m != std::numeric_limits<double>::max()) v[j1] -= m;
      }
    }
  }

  // Augmenting row reduction, two sweeps.
  for (int sweep = 0; sweep < 2 && !free_rows.empty(); ++sweep) {
    std::vector<int> next_free;
    std::size_t k = 0;
    while (k < free_rows.size()) {
      int i = free_rows[k++];
      double umin = std::numeric_limits<double>::max();
      double usubmin = std::numeric_limits<double>::max();
      int j1 = -1, j2 = -1;
      for (int j = 0; j < n; ++j) {
        double h = c(i, j) - v[j];
        if (h < usubmin) {
          if (h < umin) {
            usubmin = umin;
            j2 = j1;
            umin = h;
            j1 = j;
          } else {
            usubmin = h;
            j2 = j;
          }
        }
      }
      int i0 = colsol[j1];
      if (umin < usubmin) {
        v[j1] -= usubmin - umin;
      } else if (i0 >= 0) {
        j1 = j2;
        i0 = colsol[j1];
      }
      rowsol[i] = j1;
      colsol[j1] = i;
      if (i0 >= 0) {
        // Reclaimed row: reconsider immediately if the potential moved.
        if (umin < usubmin)
          free_rows[--k] = i0;
        else
          next_free.push_back(i0);
      }
    }
    free_rows = std::move(next_free);
  }

  // Shortest augmenting paths for the remaining free rows.
  std::vector<double> d(n);
  std::vector<int> pred(n), collist(n);
  for (int f : free_rows) {
    for (int j = 0; j < n; ++j) {
      d[j] = c(f, j) - v[j];
      pred[j] = f;
      collist[j] = j;
    }
    int low = 0, up = 0, last = -1, endofpath = -1;
    double min_d = 0.0;
    bool found = false;
    do {
      if (up == low) {
        last = low - 1;
        min_d = d[collist[up++]];
        for (int k2 = up; k2 < n; ++k2) {
          int j = collist[k2];
          double h = d[j];
          if (h <= min_d) {
            if (h < min_d) {
              up = low;
              min_d = h;
            }
            collist[k2] = collist[up];
            collist[up++] = j;
          }
        }
        for (int k2 = low; k2 < up; ++k2) {
          int j = collist[k2];
          if (colsol[j] < 0) {
            endofpath = j;
            found = true;
            break;
          }
        }
      }
      if (!found) {
        int j1 = collist[low++];
        int i = colsol[j1];
        double h = c(i, j1) - v[j1] - min_d;
        for (int k2 = up; k2 < n; ++k2) {
          int j = collist[k2];
          double v2 = c(i, j) - v[j] - h;
          if (v2 < d[j]) {
            pred[j] = i;
            if (v2 == min_d) {
              if (colsol[j] < 0) {
                endofpath = j;
                found = true;
                break;
              }
              collist[k2] = collist[up];
              collist[up++] = j;
            }
            d[j] = v2;
          }
        }
      }
    } while (!found);

    for (int k2 = 0; k2 <= last; ++k2) {
      int j1 = collist[k2];
      v[j1] += d[j1] - min_d;
    }
    int j = endofpath;
    int i;
    do {
      i = pred[j];
      colsol[j] = i;
      std::swap(rowsol[i], j);
    } while (i != f);
  }

  AssignmentResult res;
  res.row_to_col = rowsol;
  res.cost = objective(cost, n, rowsol);
  return res;
}

}  // namespace gedkit
