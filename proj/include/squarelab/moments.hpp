// The third-moment polynomial chi(p) = E ∫ phi^3 of a Bernoulli-randomized
// expansion phi = Σ X_k t_k of an indicator, computed two ways:
//
//  * closed form: M1 p + M2 p^2 for martingale differences, and
//    W1 p + W2 p^2 + W3 p^3 for Haar expansions;
//  * brute force: enumerate all 2^K selector configurations, weight each
//    by p^|S| (1-p)^{K-|S|}, and expand symbolically.
//
// Both routes are exact; agreement is tested with zero tolerance.

#pragma once

#include "squarelab/haar.hpp"
#include "squarelab/martingale.hpp"
#include "squarelab/numeric.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace squarelab {

enum class BernoulliMode { per_level, per_interval };

/// Which selector X_k multiplies which expansion term.
struct BernoulliIndex {
  BernoulliMode mode = BernoulliMode::per_level;
  std::vector<int> levels;   ///< per_level: martingale level of each term
  HaarSystem intervals;      ///< per_interval: interval of each term
  std::size_t size() const { return mode == BernoulliMode::per_level ? levels.size() : intervals.size(); }
};

/// Terms t_k sampled on weighted cells (leaves or dyadic cells).
struct Expansion {
  std::vector<Rational> weights;
  std::vector<ScalarVector> terms;
  BernoulliIndex index;

  std::size_t cell_count() const { return weights.size(); }
  /// Cellwise Σ_k t_k.
  ScalarVector sum() const;
};

/// Terms d_n, indexed per level.
Expansion martingale_expansion(const FiltrationTree& tree, const LeafSet& set, bool include_root = true);
/// Terms <1_V, h_I> h_I on the cells of V. Throws Error("below resolution").
Expansion haar_expansion(const HaarSystem& system, const DyadicSet& set);

inline constexpr std::size_t kMaxEnumerationTerms = 20;

/// Brute-force chi(p). Throws Error("enumeration too large") when K > 20.
/// `workers` partitions the configurations; the result does not depend on it.
PolyP chi_enumeration(const Expansion& expansion, unsigned workers = 1);

/// Coefficients of p, p^2, p^3. Martingale mode leaves `cubic` at zero.
struct MomentCoefficients {
  ExactScalar linear;
  ExactScalar quadratic;
  ExactScalar cubic;
  PolyP polynomial() const;
};

/// M1 = Σ_n E d_n^3, M2 = 3 Σ_{m<n} E d_m d_n^2.
MomentCoefficients martingale_moments(const FiltrationTree& tree, const LeafSet& set, bool include_root = true);
PolyP chi_exact_martingale(const FiltrationTree& tree, const LeafSet& set, bool include_root = true);

/// ∫ h_{I1} h_{I2} h_{I3}; zero unless the intervals are nested.
ExactScalar haar_triple_integral(const DyadicInterval& a, const DyadicInterval& b, const DyadicInterval& c);

/// W1 = Σ a_I^3 ∫h_I^3, W2 = 3 Σ_{I≠J} a_I^2 a_J ∫h_I^2 h_J, W3 = Σ over
/// ordered distinct triples (6 × unordered) of a a a ∫h h h.
MomentCoefficients wavelet_moment_coefficients(const HaarSystem& system, const DyadicSet& set);

/// ∫ (Π 1_V)^3 with Π the projection onto span{h_I : I in system}.
ExactScalar projection_cube_integral(const HaarSystem& system, const DyadicSet& set);

/// Cellwise E_X (phi - p f)^2 - p(1-p) Σ t_k^2, by enumeration over the
/// selectors of the terms touching each cell. `target` is 1_V for complete
/// expansions and its projection otherwise.
/// Throws Error("expansion does not sum to indicator") when Σ t_k ≠ target.
ScalarVector variance_identity_check(const Expansion& expansion, const ScalarVector& target, const Rational& p);

/// E(X - p)^3 = p(1-p)(1-2p), checked against the two-point expectation.
ExactScalar bernoulli_third_moment(const Rational& p);
/// E(X - p)^k by direct two-point expectation.
Rational bernoulli_central_moment(const Rational& p, unsigned k);

/// Quantities entering the closing argument for the martingale theorem.
struct ProofCertificate {
  Rational pv;
  ExactScalar m1;
  ExactScalar m2;
  ExactScalar eta_ratio;
  /// r1 = P + 2 M1, r2 = M2 + 3 M1, r3 = P/8 - M1/2 - M2/4.
  std::array<ExactScalar, 3> residuals;
  /// Rows express r1, r2, r3 as linear forms in (P, M1, M2).
  ScalarMatrix system;
  ExactScalar determinant;
  int rank = 0;
  /// λ with λ·r ≡ 0 for every (P, M1, M2); empty when the system is regular.
  std::vector<ExactScalar> dependency;
  /// λ·(r1, r2, r3) evaluated on this instance (zero for a correct certificate).
  ExactScalar dependency_value;
  /// Whether P is a fixed linear combination of r1, r2, r3.
  bool pv_recoverable = false;
  /// Coefficients of P when recoverable.
  std::vector<ExactScalar> recovery;
  /// chi(p) - [(P + 2 M1) p^3 - 3 M1 p^2 + M1 p].
  PolyP residual_polynomial;
  /// max |r_i| / P.
  ExactScalar residual_scale;

  bool verified() const;
};

/// Throws Error("empty set").
ProofCertificate proof_certificate(const FiltrationTree& tree, const LeafSet& set);

/// M2 against 3 E 1_V (S 1_V)^2 under one indexing convention.
struct SymmetricRemarkCheck {
  bool include_root = true;
  ExactScalar m1;
  ExactScalar m2;
  ExactScalar three_energy;
  bool holds() const { return m1.is_zero() && m2 == three_energy; }
};
SymmetricRemarkCheck symmetric_remark_check(const FiltrationTree& tree, const LeafSet& set, bool include_root);

struct DPrimeDiagnostics {
  HaarSystem members;
  double dprime_mass = 0;  ///< Σ_{I∈D'} a_I^2
  double in_mass = 0;      ///< Σ_{I∈D'} ∫|a_I h_I|^3
  double out_mass = 0;     ///< Σ_{I∉D'} ∫|a_I h_I|^3
  ExactScalar dprime_mass_exact;
  ExactScalar in_mass_exact;
  ExactScalar out_mass_exact;
};

/// D' = {I : |a_I| >= eta^{1/3} |I|^{1/2}}, decided by (a_I^2)^3 >= eta^2 |I|^3.
DPrimeDiagnostics dprime_diagnostics(const HaarSystem& system, const DyadicSet& set, const Rational& eta);

/// Exact rank and left null space of a small matrix (Gauss-Jordan).
int exact_rank(const ScalarMatrix& m);
std::vector<ScalarVector> exact_left_null_space(const ScalarMatrix& m);
ExactScalar exact_determinant(ScalarMatrix m);

}  // namespace squarelab
