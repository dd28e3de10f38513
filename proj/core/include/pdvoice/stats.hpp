#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdvoice/matrix.hpp"

namespace pdvoice {

struct SampleGroup {
  std::string name;
  std::vector<double> values;
};

struct TestResult {
  std::string test_name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df1;
  std::optional<double> df2;
};

/// Upper tails. Throw Error(DomainError) for df < 1 or negative x.
double normal_sf(double z);
double chi2_sf(double x, double df);
double f_sf(double x, double d1, double d2);

/// Average ranks (1-based) of the values; ties share the mean of the ranks
/// they span. When tie_term is non-null it receives sum(t^3 - t) over tie
/// blocks.
std::vector<double> midranks(std::span<const double> values, double* tie_term = nullptr);

/// Royston's AS R94 approximation, 3 <= n <= 5000.
/// Throws Error(SampleTooSmall / SampleTooLarge / ZeroVariance).
TestResult shapiro_wilk(std::span<const double> sample);

/// Brown-Forsythe variant (absolute deviations from group medians), F test
/// with (k - 1, N - k) degrees of freedom. Throws Error(TooFewGroups) for
/// k < 2 and Error(SampleTooSmall) for a group with fewer than two values.
/// When every deviation equals its group mean the statistic is 0 (p = 1)
/// if the group means agree and Error(ZeroVariance) otherwise.
TestResult levene(const std::vector<SampleGroup>& groups);

/// Tie-corrected H with a chi-square(k - 1) tail.
/// Throws Error(TooFewGroups), Error(EmptyInput) or Error(AllTied).
TestResult kruskal_wallis(const std::vector<SampleGroup>& groups);

/// k x k symmetric matrices with unit diagonal (zero for z).
struct PairwiseMatrix {
  std::vector<std::string> names;
  Matrix z;
  Matrix raw_p;
  Matrix adjusted_p;
  std::size_t comparisons = 0;
};

/// Dunn's rank-sum comparisons with tie correction and Bonferroni
/// adjustment min(1, k(k-1)/2 * p). When every pooled value is tied all
/// z are 0 and all p are 1. Throws Error(TooFewGroups).
PairwiseMatrix dunn_bonferroni(const std::vector<SampleGroup>& groups);

struct LetterDisplay {
  std::vector<std::string> names;
  std::vector<std::string> letters;  // per group, e.g. "a", "ab"
  /// membership[letter][group]
  std::vector<std::vector<bool>> membership;

  bool share_letter(std::size_t i, std::size_t j) const;
};

/// Insert-and-absorb compact letter display: two groups share a letter
/// exactly when their adjusted p exceeds alpha. Letters are handed out in
/// order of each letter's earliest member, so the first group gets "a".
LetterDisplay compact_letters(const PairwiseMatrix& pm, double alpha = 0.05);

/// Same algorithm on an explicit "differs" relation (k x k, symmetric).
LetterDisplay compact_letters(const std::vector<std::string>& names,
                              const std::vector<std::vector<bool>>& differs);

}  // namespace pdvoice
