#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/ensemble.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

enum class Status { Injective, NotInjective, Indeterminate };

const char* to_string(Status s);

// Violating index subset for the complement property: neither {phi_n : n in S}
// nor its complement spans. Encoded both as a bitmask (bit k <-> index k,
// 0-based) and as the sorted index list.
struct SubsetWitness {
  std::uint64_t mask = 0;
  std::vector<int> subset;
  bool spans_subset = false;
  bool spans_complement = false;
};

struct WitnessPair {
  Eigen::VectorXcd x;
  Eigen::VectorXcd y;
};

struct InjectivityVerdict {
  Status status = Status::Indeterminate;
  std::string method;
  int nullity = -1;  // -1 when the nullspace was not computed
  std::optional<WitnessPair> witness;
  std::optional<SubsetWitness> subset;
  std::string reason;
  double rank_floor = 0.0;
  double det_tol = 0.0;
};

struct CPOptions {
  int max_N = 26;
  int threads = 0;
  RankPolicy rank;
};

struct FullSparkOptions {
  std::uint64_t max_subsets = 5'000'000;
  RankPolicy rank;
};

struct HMWOptions {
  double det_tol = 1e-10;  // nonsingular means |det H| > det_tol * ||H||^3
  RankPolicy rank;
};

// Complement property: for every index subset S, {phi_n}_{n in S} or its
// complement spans. Enumerates the 2^(N-1) complementary pairs; on failure
// the returned witness is the violating S with the smallest bitmask among
// those containing index 0.
std::pair<bool, std::optional<SubsetWitness>> complement_property(const MeasurementEnsemble& Phi,
                                                                  const CPOptions& opts = {});

// Every M-column subset invertible.
bool full_spark(const MeasurementEnsemble& Phi, const FullSparkOptions& opts = {});

// Real ensembles: injective iff the complement property holds. On failure the
// witness pair is (u + v, u - v) with u orthogonal to the S side and v to the
// complement side.
InjectivityVerdict real_injectivity(const MeasurementEnsemble& Phi, const CPOptions& opts = {});

// Complex M = 3 decision through the nullspace of the super analysis
// operator: empty nullspace, or a one-dimensional nullspace spanned by a
// nonsingular matrix, means injective; anything else yields a witness.
InjectivityVerdict hmw_test(const MeasurementEnsemble& Phi, const HMWOptions& opts = {});

// Complex ensembles, any M: decides whenever the nullspace structure allows
// (nullity <= 1; nullity >= 2 handled for M = 2 and M = 3), otherwise
// Indeterminate.
InjectivityVerdict nullspace_classifier(const MeasurementEnsemble& Phi, const HMWOptions& opts = {});

// Complement property as a necessary filter for complex ensembles: a CP
// violation yields a candidate pair that is re-verified against the intensity
// map before NotInjective is reported; CP holding decides nothing.
InjectivityVerdict cp_necessity_filter(const MeasurementEnsemble& Phi, const CPOptions& opts = {});

// dim_R span{phi_n phi_n^* u : n} for a probe direction u. A value below
// 2M - 1 certifies NotInjective; the value never exceeds 2M - 1.
int span_condition(const MeasurementEnsemble& Phi, const Eigen::VectorXcd& u,
                   const RankPolicy& policy = {});

// Constructive counterpart: when span_condition(Phi, u) < 2M - 1, returns the
// collision pair (u + v, u - v) with v orthogonal to the span and to iu.
std::optional<WitnessPair> span_condition_witness(const MeasurementEnsemble& Phi,
                                                  const Eigen::VectorXcd& u,
                                                  const RankPolicy& policy = {});

// Largest proven lower bound on the number of measurements any injective
// complex ensemble needs, as a function of M.
int hmw_lower_bound(int M);

}  // namespace phaselab
