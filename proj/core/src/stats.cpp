#include "pdvoice/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pdvoice/error.hpp"

namespace pdvoice {
namespace {

// c[0] + c[1] x + ... + c[n-1] x^(n-1)
double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k];
  return r;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_df(double df, const char* what) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    throw Error(ErrorCode::DomainError, std::string(what) + " degrees of freedom must be >= 1");
  }
}

void require_groups(const std::vector<SampleGroup>& groups) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::TooFewGroups, "need at least two groups, got " + std::to_string(groups.size()));
  }
  for (const auto& g : groups) {
    if (g.values.empty()) throw Error(ErrorCode::EmptyInput, "group `" + g.name + "` is empty");
    for (double v : g.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "group `" + g.name + "` has a non-finite value");
    }
  }
}

struct PooledRanks {
  std::vector<double> mean_rank;  // per group
  std::vector<double> rank_sum;
  double tie_term = 0.0;
  double total = 0.0;
};

PooledRanks pooled_ranks(const std::vector<SampleGroup>& groups) {
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  PooledRanks out;
  const auto ranks = midranks(pooled, &out.tie_term);
  out.total = static_cast<double>(pooled.size());
  std::size_t at = 0;
  for (const auto& g : groups) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) s += ranks[at++];
    out.rank_sum.push_back(s);
    out.mean_rank.push_back(s / static_cast<double>(g.values.size()));
  }
  return out;
}

std::string letter_name(std::size_t index) {
  std::string s;
  ++index;
  while (index > 0) {
    --index;
    s.insert(s.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  }
  return s;
}

}  // namespace

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi2_sf(double x, double df) {
  require_df(df, "chi-square");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorCode::DomainError, "chi-square argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double f_sf(double x, double d1, double d2) {
  require_df(d1, "F numerator");
  require_df(d2, "F denominator");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorCode::DomainError, "F argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  // P(F > x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2)
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

std::vector<double> midranks(std::span<const double> values, double* tie_term) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    const auto t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

TestResult shapiro_wilk(std::span<const double> sample) {
  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorCode::SampleTooSmall, "Shapiro-Wilk needs n >= 3, got " + std::to_string(n));
  if (n > 5000) throw Error(ErrorCode::SampleTooLarge, "Shapiro-Wilk supports n <= 5000, got " + std::to_string(n));

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 0.0)) throw Error(ErrorCode::ZeroVariance, "all values are identical");

  // Half-sample coefficients a[0..n/2), largest first.
  const std::size_t half = n / 2;
  const auto an = static_cast<double>(n);
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    const boost::math::normal standard;
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = boost::math::quantile(standard, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;
    std::size_t first_plain;
    double fac;
    if (n > 5) {
      first_plain = 2;
      const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      first_plain = 1;
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
  }

  // W as the squared correlation between the antisymmetric coefficient
  // vector and the ordered sample, in the 1 - w1 form that keeps precision
  // when W is close to one.
  std::vector<double> full(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    full[i] = -a[i];
    full[n - 1 - i] = a[i];
  }
  const double mean_a = std::accumulate(full.begin(), full.end(), 0.0) / an;
  double mean_x = 0.0;
  for (double v : x) mean_x += v / range;
  mean_x /= an;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = full[i] - mean_a;
    const double dx = x[i] / range - mean_x;
    ssa += da * da;
    ssx += dx * dx;
    sax += da * dx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  TestResult result{"shapiro_wilk", w, 1.0, std::nullopt, std::nullopt};
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;  // 6 / pi
    constexpr double stqr = 1.04719755119660;  // pi / 3
    result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return result;
  }
  double y = std::log(w1);
  const double lxx = std::log(an);
  double mean, sd;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      result.p_value = 1e-99;
      return result;
    }
    y = -std::log(gamma - y);
    mean = poly(c3, an);
    sd = std::exp(poly(c4, an));
  } else {
    mean = poly(c5, lxx);
    sd = std::exp(poly(c6, lxx));
  }
  result.p_value = std::clamp(normal_sf((y - mean) / sd), 0.0, 1.0);
  return result;
}

TestResult levene(const std::vector<SampleGroup>& groups) {
  require_groups(groups);
  const auto k = static_cast<double>(groups.size());
  double total_n = 0.0;
  std::vector<std::vector<double>> dev;
  std::vector<double> group_mean;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw Error(ErrorCode::SampleTooSmall, "group `" + g.name + "` needs at least two values");
    }
    const double med = median_of(g.values);
    auto& d = dev.emplace_back();
    for (double v : g.values) d.push_back(std::abs(v - med));
    const double s = std::accumulate(d.begin(), d.end(), 0.0);
    group_mean.push_back(s / static_cast<double>(d.size()));
    grand += s;
    total_n += static_cast<double>(d.size());
  }
  grand /= total_n;
  double between = 0.0, within = 0.0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    between += static_cast<double>(dev[i].size()) * (group_mean[i] - grand) * (group_mean[i] - grand);
    for (double d : dev[i]) within += (d - group_mean[i]) * (d - group_mean[i]);
  }
  TestResult result{"levene_median", 0.0, 1.0, k - 1.0, total_n - k};
  if (within <= 0.0) {
    if (between <= 0.0) return result;
    throw Error(ErrorCode::ZeroVariance, "deviations are constant within every group");
  }
  result.statistic = (total_n - k) / (k - 1.0) * between / within;
  result.p_value = f_sf(result.statistic, k - 1.0, total_n - k);
  return result;
}

TestResult kruskal_wallis(const std::vector<SampleGroup>& groups) {
  require_groups(groups);
  const PooledRanks r = pooled_ranks(groups);
  const double n = r.total;
  const double denom = n * n * n - n;
  const double correction = denom > 0.0 ? 1.0 - r.tie_term / denom : 0.0;
  if (correction <= 0.0) throw Error(ErrorCode::AllTied, "every pooled value is tied");
  double h = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    h += r.rank_sum[i] * r.rank_sum[i] / static_cast<double>(groups[i].values.size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  h = std::max(h / correction, 0.0);
  const double df = static_cast<double>(groups.size()) - 1.0;
  return {"kruskal_wallis", h, chi2_sf(h, df), df, std::nullopt};
}

PairwiseMatrix dunn_bonferroni(const std::vector<SampleGroup>& groups) {
  require_groups(groups);
  const std::size_t k = groups.size();
  const PooledRanks r = pooled_ranks(groups);
  const double n = r.total;
  const double variance = n * (n + 1.0) / 12.0 - r.tie_term / (12.0 * (n - 1.0));

  PairwiseMatrix pm;
  for (const auto& g : groups) pm.names.push_back(g.name);
  pm.comparisons = k * (k - 1) / 2;
  pm.z = Matrix(k, k, 0.0);
  pm.raw_p = Matrix(k, k, 1.0);
  pm.adjusted_p = Matrix(k, k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double z = 0.0;
      if (variance > 0.0) {
        const double se = std::sqrt(variance * (1.0 / static_cast<double>(groups[i].values.size()) +
                                                1.0 / static_cast<double>(groups[j].values.size())));
        z = (r.mean_rank[i] - r.mean_rank[j]) / se;
      }
      const double raw = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
      const double adjusted = std::min(1.0, static_cast<double>(pm.comparisons) * raw);
      pm.z(i, j) = z;
      pm.z(j, i) = -z;
      pm.raw_p(i, j) = pm.raw_p(j, i) = raw;
      pm.adjusted_p(i, j) = pm.adjusted_p(j, i) = adjusted;
    }
  }
  return pm;
}

bool LetterDisplay::share_letter(std::size_t i, std::size_t j) const {
  return std::any_of(membership.begin(), membership.end(),
                     [&](const std::vector<bool>& col) { return col[i] && col[j]; });
}

LetterDisplay compact_letters(const PairwiseMatrix& pm, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in (0, 1)");
  const std::size_t k = pm.names.size();
  std::vector<std::vector<bool>> differs(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) differs[i][j] = i != j && pm.adjusted_p(i, j) <= alpha;
  }
  return compact_letters(pm.names, differs);
}

LetterDisplay compact_letters(const std::vector<std::string>& names,
                              const std::vector<std::vector<bool>>& differs) {
  const std::size_t k = names.size();
  using Column = std::vector<bool>;
  std::vector<Column> columns{Column(k, true)};

  auto absorb = [&] {
    std::vector<Column> kept;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      bool redundant = false;
      for (std::size_t o = 0; o < columns.size() && !redundant; ++o) {
        if (o == c) continue;
        bool subset = true;
        for (std::size_t g = 0; g < k && subset; ++g) subset = !columns[c][g] || columns[o][g];
        // Identical columns: keep only the first copy.
        redundant = subset && (columns[c] != columns[o] || o < c);
      }
      if (!redundant) kept.push_back(columns[c]);
    }
    columns = std::move(kept);
  };

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!differs[i][j]) continue;
      std::vector<Column> next;
      for (auto& col : columns) {
        if (col[i] && col[j]) {
          Column without_i = col, without_j = col;
          without_i[i] = false;
          without_j[j] = false;
          next.push_back(std::move(without_i));
          next.push_back(std::move(without_j));
        } else {
          next.push_back(std::move(col));
        }
      }
      columns = std::move(next);
      absorb();
    }
  }

  // Order letters by their earliest member so group 0 receives "a".
  std::sort(columns.begin(), columns.end(), [&](const Column& a, const Column& b) {
    for (std::size_t g = 0; g < k; ++g) {
      if (a[g] != b[g]) return a[g];
    }
    return false;
  });

  LetterDisplay out{names, std::vector<std::string>(k), columns};
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string letter = letter_name(c);
    for (std::size_t g = 0; g < k; ++g) {
      if (columns[c][g]) out.letters[g] += letter;
    }
  }
  return out;
}

}  // namespace pdvoice
