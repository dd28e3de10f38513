#include <cstdio>

#include "pdvoice/metrics.hpp"
#include "pdvoice/stats.hpp"

int main() {
  auto m = pdvoice::metrics(pdvoice::confusion({1, 1, 0, 0}, {1, 0, 1, 0}));
  auto kw = pdvoice::kruskal_wallis({{"a", {1, 2, 3}}, {"b", {4, 5, 6}}, {"c", {7, 8, 9}}});
  std::printf("accuracy %.2f H %.1f\n", m.accuracy, kw.statistic);
  return m.accuracy == 0.5 && kw.statistic > 7.19 ? 0 : 1;
}
