#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbll/geometry.hpp"

namespace rbll {

// Tuple of linear maps L_j: R^m -> R, row j of `coeffs` holding the
// coefficients of L_j. The same coefficients act blockwise on (R^d)^m,
// which is how every d >= 1 instance of the family is evaluated.
struct LinearFamily {
  int m = 0;      // number of coordinate blocks
  int dim_d = 1;  // ambient dimension of each block
  std::vector<double> coeffs;       // J x m, row-major
  std::vector<std::string> labels;  // one per row

  int J() const { return m == 0 ? 0 : static_cast<int>(coeffs.size()) / m; }
  double coef(int j, int i) const { return coeffs[static_cast<std::size_t>(j) * m + i]; }
  double& coef(int j, int i) { return coeffs[static_cast<std::size_t>(j) * m + i]; }
  std::span<const double> row(int j) const {
    return {coeffs.data() + static_cast<std::size_t>(j) * m, static_cast<std::size_t>(m)};
  }

  static LinearFamily from_rows(const std::vector<std::vector<double>>& rows, int d = 1);
  // The three-map family x, y, x+y underlying the Riesz-Sobolev inequality.
  static LinearFamily riesz_sobolev(int d = 1);
};

struct NondegeneracyReport {
  bool surjective = false;           // (i) every row nonzero
  bool pairwise_independent = false; // (ii) no row a multiple of another
  bool complements_full_rank = false;// (iii) rows {i != j} have rank m, all j
  std::vector<int> zero_rows;
  std::vector<std::pair<int, int>> proportional_pairs;
  std::vector<int> rank_deficient_at;
  bool pass() const { return surjective && pairwise_independent && complements_full_rank; }
};

// Checks the three nondegeneracy conditions. Rank uses singular values with
// relative tolerance 1e-10; proportionality uses normalized 2x2 minors below
// 1e-12. Fewer than m+1 rows cannot satisfy (iii) and is rejected outright.
NondegeneracyReport validate_nondegenerate(const LinearFamily& fam);

// y = L_j(x) for x in (R^d)^m laid out as m consecutive blocks of length d.
void eval_L(const LinearFamily& fam, int j, std::span<const double> x,
            std::span<double> out);

// Scalar evaluation for d = 1.
double eval_L1(const LinearFamily& fam, int j, std::span<const double> x);

// (r_j L_j)_j for positive scales r.
LinearFamily apply_dilation_action(const LinearFamily& fam, std::span<const double> r);

// (L_j o A)_j for invertible A acting diagonally on (R^d)^m; in coefficients,
// coeffs <- coeffs * A.
LinearFamily apply_glm_action(const LinearFamily& fam,
                              const std::vector<std::vector<double>>& A);

// Lexicographically first size-m subset J' with independent rows, plus its
// smallest element n. Requires nondegeneracy (condition (iii) guarantees
// existence).
std::pair<std::vector<int>, int> select_independent_subset(const LinearFamily& fam);

}  // namespace rbll
