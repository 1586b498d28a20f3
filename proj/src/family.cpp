#include "rbll/family.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rbll {

namespace {

constexpr double kRankTol = 1e-10;  // relative, on singular values
constexpr double kPropTol = 1e-12;  // normalized 2x2 minors

Eigen::MatrixXd rows_matrix(const LinearFamily& fam, int skip = -1) {
  const int J = fam.J();
  Eigen::MatrixXd M(skip < 0 ? J : J - 1, fam.m);
  int r = 0;
  for (int j = 0; j < J; ++j) {
    if (j == skip) continue;
    for (int i = 0; i < fam.m; ++i) M(r, i) = fam.coef(j, i);
    ++r;
  }
  return M;
}

int matrix_rank(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cut = s(0) * kRankTol;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

}  // namespace

LinearFamily LinearFamily::from_rows(const std::vector<std::vector<double>>& rows, int d) {
  if (rows.empty()) throw std::invalid_argument("family: no rows");
  LinearFamily fam;
  fam.m = static_cast<int>(rows[0].size());
  fam.dim_d = d;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (static_cast<int>(rows[j].size()) != fam.m)
      throw std::invalid_argument("family: ragged coefficient rows");
    fam.coeffs.insert(fam.coeffs.end(), rows[j].begin(), rows[j].end());
    fam.labels.push_back(std::to_string(j + 1));
  }
  return fam;
}

LinearFamily LinearFamily::riesz_sobolev(int d) {
  return from_rows({{1, 0}, {0, 1}, {1, 1}}, d);
}

NondegeneracyReport validate_nondegenerate(const LinearFamily& fam) {
  if (fam.m < 2) throw std::invalid_argument("nondegeneracy requires m >= 2");
  if (fam.J() < fam.m + 1)
    throw StructuralError("nondegeneracy condition (iii) forces |J| >= m+1");

  NondegeneracyReport rep;
  const int J = fam.J();

  rep.surjective = true;
  for (int j = 0; j < J; ++j) {
    double n2 = 0;
    for (int i = 0; i < fam.m; ++i) n2 += fam.coef(j, i) * fam.coef(j, i);
    if (n2 == 0) {
      rep.surjective = false;
      rep.zero_rows.push_back(j);
    }
  }

  rep.pairwise_independent = true;
  for (int a = 0; a < J; ++a) {
    for (int b = a + 1; b < J; ++b) {
      double na = 0, nb = 0, minor_max = 0;
      for (int i = 0; i < fam.m; ++i) {
        na = std::max(na, std::abs(fam.coef(a, i)));
        nb = std::max(nb, std::abs(fam.coef(b, i)));
      }
      for (int i = 0; i < fam.m; ++i)
        for (int k = i + 1; k < fam.m; ++k)
          minor_max = std::max(minor_max,
                               std::abs(fam.coef(a, i) * fam.coef(b, k) -
                                        fam.coef(a, k) * fam.coef(b, i)));
      if (na > 0 && nb > 0 && minor_max <= kPropTol * na * nb) {
        rep.pairwise_independent = false;
        rep.proportional_pairs.emplace_back(a, b);
      }
    }
  }

  rep.complements_full_rank = true;
  for (int j = 0; j < J; ++j) {
    if (matrix_rank(rows_matrix(fam, j)) < fam.m) {
      rep.complements_full_rank = false;
      rep.rank_deficient_at.push_back(j);
    }
  }
  return rep;
}

void eval_L(const LinearFamily& fam, int j, std::span<const double> x,
            std::span<double> out) {
  const int d = static_cast<int>(out.size());
  if (static_cast<int>(x.size()) != fam.m * d)
    throw std::invalid_argument("eval_L: x must have m blocks of length d");
  for (int k = 0; k < d; ++k) out[k] = 0;
  for (int i = 0; i < fam.m; ++i) {
    const double a = fam.coef(j, i);
    if (a == 0) continue;
    for (int k = 0; k < d; ++k) out[k] += a * x[static_cast<std::size_t>(i) * d + k];
  }
}

double eval_L1(const LinearFamily& fam, int j, std::span<const double> x) {
  double s = 0;
  for (int i = 0; i < fam.m; ++i) s += fam.coef(j, i) * x[i];
  return s;
}

LinearFamily apply_dilation_action(const LinearFamily& fam, std::span<const double> r) {
  if (static_cast<int>(r.size()) != fam.J())
    throw std::invalid_argument("dilation action: need one scale per map");
  LinearFamily out = fam;
  for (int j = 0; j < fam.J(); ++j) {
    if (!(r[j] > 0)) throw std::invalid_argument("dilation action: scales must be positive");
    for (int i = 0; i < fam.m; ++i) out.coef(j, i) = fam.coef(j, i) * r[j];
  }
  return out;
}

LinearFamily apply_glm_action(const LinearFamily& fam,
                              const std::vector<std::vector<double>>& A) {
  const int m = fam.m;
  Eigen::MatrixXd Am(m, m);
  if (static_cast<int>(A.size()) != m)
    throw std::invalid_argument("glm action: A must be m x m");
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(A[i].size()) != m)
      throw std::invalid_argument("glm action: A must be m x m");
    for (int k = 0; k < m; ++k) Am(i, k) = A[i][k];
  }
  if (std::abs(Am.determinant()) <= 1e-12)
    throw std::invalid_argument("glm action: A is singular");
  LinearFamily out = fam;
  for (int j = 0; j < fam.J(); ++j)
    for (int k = 0; k < m; ++k) {
      double s = 0;
      for (int i = 0; i < m; ++i) s += fam.coef(j, i) * Am(i, k);
      out.coef(j, k) = s;
    }
  return out;
}

std::pair<std::vector<int>, int> select_independent_subset(const LinearFamily& fam) {
  const int J = fam.J(), m = fam.m;
  std::vector<int> pick;
  // Greedy lexicographic scan keeps the first row that grows the rank; the
  // result is the lexicographically smallest independent subset.
  Eigen::MatrixXd M(m, m);
  int r = 0;
  for (int j = 0; j < J && r < m; ++j) {
    for (int i = 0; i < m; ++i) M(r, i) = fam.coef(j, i);
    Eigen::MatrixXd sub = M.topRows(r + 1);
    if (matrix_rank(sub) == r + 1) {
      pick.push_back(j);
      ++r;
    }
  }
  if (r < m) throw StructuralError("select_independent_subset: family is degenerate");
  return {pick, pick.front()};
}

}  // namespace rbll
