#pragma once

#include <string>
#include <vector>

#include "rbll/family.hpp"

namespace rbll {

// H-representation of K_e = {x in R^m : |L_j(x)| <= b_j}.
struct PolytopeH {
  int m = 0;
  std::vector<double> rows;  // J x m, row-major (same layout as LinearFamily)
  std::vector<double> b;     // J bounds, b_j > 0
  int J() const { return m == 0 ? 0 : static_cast<int>(rows.size()) / m; }
};

PolytopeH build_K_e(const LinearFamily& fam, std::span<const double> e);

// Componentwise e^{1/d}; the d=1 measure vector that carries admissibility
// for the d-dimensional instance.
std::vector<double> dimension_reduce(std::span<const double> e, int d);

// Ball radii r_j with omega_d r_j^d = e_j.
std::vector<double> radii_from_measures(std::span<const double> e, int d);

enum class Verdict { inadmissible, weakly_admissible, strictly_admissible };
std::string to_string(Verdict v);

struct FaceWitness {
  int k = -1;
  bool face_reached = false;   // the face |L_k| = b_k meets K_e
  double slack = 0;            // max over the face of min_{i != k} (b_i - |L_i(x)|)
  std::vector<double> x;       // attaining point
  std::vector<double> slacks;  // per-constraint slack at x
};

struct LeftDerivativeRecord {
  int j = -1;
  bool applicable = false;  // kernel positive at the boundary point
  double value = 0;
  double error = 0;
  bool strictly_negative = false;
};

struct GenericityReport {
  bool checked = false;
  bool generic = false;
  std::vector<std::vector<double>> vertices;
  std::vector<int> active_counts;
};

struct AdmissibilityCertificate {
  Verdict verdict = Verdict::inadmissible;
  int d = 1;
  std::vector<double> e;          // original measures
  std::vector<double> e_reduced;  // e^{1/d}
  std::vector<double> r;          // ball radii
  std::vector<FaceWitness> witnesses;
  std::vector<LeftDerivativeRecord> left_derivatives;
  GenericityReport genericity;
  double slack_threshold = 0;
};

struct CertifyOptions {
  double slack_threshold = 1e-9;  // strictness margin for LP slacks
  bool check_left_derivatives = true;
  bool check_genericity = true;
};

// Admissibility of (L, e) in dimension d, via the d=1 reduction e -> e^{1/d}.
// Per index k the max-min-slack LP on the face |L_k| = b_k decides Def. 2.4
// (face reached) and condition (i) of strictness (positive slack); the
// kernel's one-sided boundary derivative decides condition (ii).
AdmissibilityCertificate certify(const LinearFamily& fam, std::span<const double> e,
                                 int d, const CertifyOptions& opts = {});

// Vertex enumeration of K_e (m <= 3): generic iff every vertex has exactly
// m active constraints.
GenericityReport check_generic(const LinearFamily& fam, std::span<const double> e,
                               double tol = 1e-9);

// Max over {x : L_k(x) = b_k} of min_{i != k} (b_i - |L_i(x)|); always
// finite under nondegeneracy. Negative slack means the face misses K_e.
FaceWitness max_slack_on_face(const PolytopeH& poly, int k);

std::string serialize_certificate(const AdmissibilityCertificate& cert,
                                  const LinearFamily& fam);

}  // namespace rbll
