#include "simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace rarexact::detail {

namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(int r, int c) { return t_[r * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  double& cost(int c) { return at(m_, c); }  // reduced cost row (z_j - c_j)
  std::vector<int>& basis() { return basis_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= n_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Returns false when unbounded. Columns >= allowed are never entered.
  bool optimize(int allowed) {
    int degenerate = 0;
    for (int iter = 0; iter < 100000; ++iter) {
      const bool bland = degenerate > 50;
      int pc = -1;
      double best = -kEps;
      for (int c = 0; c < allowed; ++c) {
        if (cost(c) < best) {
          pc = c;
          if (bland) break;
          best = cost(c);
        }
      }
      if (pc < 0) return true;
      int pr = -1;
      double ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double a = at(r, pc);
        if (a <= kEps) continue;
        const double q = rhs(r) / a;
        if (pr < 0 || q < ratio - kEps || (q <= ratio + kEps && basis_[r] < basis_[pr])) {
          pr = r;
          ratio = q;
        }
      }
      if (pr < 0) return false;
      degenerate = ratio <= kEps ? degenerate + 1 : 0;
      pivot(pr, pc);
    }
    throw std::runtime_error("simplex: iteration limit");
  }

 private:
  int m_, n_;
  std::vector<double> t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult simplex_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& b, int n_le) {
  const int m = static_cast<int>(rows.size());
  const int nv = static_cast<int>(c.size());
  const int n_eq = m - n_le;
  // Columns: variables, slacks (inequality rows), artificials (equality rows).
  const int slack0 = nv, art0 = nv + n_le, ncols = nv + m;
  Tableau t(m, ncols);
  for (int r = 0; r < m; ++r) {
    if (b[r] < 0.0) throw std::invalid_argument("simplex: negative right-hand side");
    for (int j = 0; j < nv; ++j) t.at(r, j) = rows[r][j];
    t.rhs(r) = b[r];
    const int aux = r < n_le ? slack0 + r : art0 + (r - n_le);
    t.at(r, aux) = 1.0;
    t.basis()[r] = aux;
  }
  LpResult out;
  if (n_eq > 0) {
    // Phase one: maximize -sum(artificials).
    for (int j = 0; j <= ncols; ++j) {
      double s = 0.0;
      for (int r = n_le; r < m; ++r) s -= t.at(r, j);
      t.cost(j) = s;
    }
    for (int r = n_le; r < m; ++r) t.cost(art0 + (r - n_le)) = 0.0;
    t.optimize(art0);
    if (-t.rhs(m) > 1e-9) return out;  // infeasible
    // Drive remaining zero-level artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (t.basis()[r] < art0) continue;
      for (int j = 0; j < art0; ++j)
        if (std::abs(t.at(r, j)) > 1e-9) {
          t.pivot(r, j);
          break;
        }
    }
  }
  // Phase two objective row: z_j - c_j with z = c_B B^-1 A.
  for (int j = 0; j <= ncols; ++j) {
    double s = j < nv ? -c[j] : 0.0;
    for (int r = 0; r < m; ++r) {
      const int bj = t.basis()[r];
      if (bj < nv) s += c[bj] * t.at(r, j);
    }
    t.cost(j) = s;
  }
  if (!t.optimize(art0)) return out;
  out.optimal = true;
  out.value = t.rhs(m);
  out.x.assign(nv, 0.0);
  for (int r = 0; r < m; ++r)
    if (t.basis()[r] < nv) out.x[t.basis()[r]] = t.rhs(r);
  out.y.resize(m);
  for (int r = 0; r < m; ++r) out.y[r] = t.cost(r < n_le ? slack0 + r : art0 + (r - n_le));
  return out;
}

}  // namespace rarexact::detail
