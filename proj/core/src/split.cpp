#include "pdvoice/split.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdvoice/error.hpp"
#include "pdvoice/random.hpp"

namespace pdvoice {
namespace {

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFFu;
    h *= 0x100000001B3ULL;
  }
}

}  // namespace

ScalerState fit_scaler(const Matrix& m) {
  if (m.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a scaler on zero rows");
  ScalerState s;
  s.means.assign(m.cols(), 0.0);
  s.stds.assign(m.cols(), 0.0);
  const auto n = static_cast<double>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) s.means[c] += m(r, c);
  }
  for (double& mu : s.means) mu /= n;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double d = m(r, c) - s.means[c];
      s.stds[c] += d * d;
    }
  }
  for (double& sd : s.stds) sd = std::sqrt(sd / n);
  return s;
}

Matrix apply_scaler(const ScalerState& state, const Matrix& m) {
  if (m.cols() != state.means.size() || state.stds.size() != state.means.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler fitted on " + std::to_string(state.means.size()) +
                                                  " columns, matrix has " + std::to_string(m.cols()));
  }
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(r, c) = (m(r, c) - state.means[c]) / std::max(state.stds[c], ScalerState::kStdFloor);
    }
  }
  return out;
}

std::uint64_t SplitIndices::fingerprint() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto* part : {&train, &validation, &test}) {
    fnv_mix(h, part->size());
    for (std::size_t i : *part) fnv_mix(h, i);
  }
  return h;
}

SplitIndices stratified_indices(const LabelVector& labels, std::uint64_t seed) {
  Rng rng(seed);
  SplitIndices out;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < 3) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(cls) + " has " +
                                                std::to_string(members.size()) +
                                                " rows; at least 3 are needed");
    }
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n_test = std::max<std::size_t>(1, members.size() / 5);
    const std::size_t n_rest = members.size() - n_test;
    const std::size_t n_val = std::max<std::size_t>(1, n_rest / 4);
    auto it = members.begin();
    out.test.insert(out.test.end(), it, it + static_cast<std::ptrdiff_t>(n_test));
    it += static_cast<std::ptrdiff_t>(n_test);
    out.validation.insert(out.validation.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
    it += static_cast<std::ptrdiff_t>(n_val);
    out.train.insert(out.train.end(), it, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitTriple stratified_split(const LabeledDataset& ds, std::uint64_t seed) {
  ds.validate();
  SplitTriple split;
  split.indices = stratified_indices(ds.labels, seed);
  auto gather = [&](const std::vector<std::size_t>& idx) {
    Partition p;
    p.features = ds.features.select_rows(idx);
    p.labels.reserve(idx.size());
    for (std::size_t i : idx) p.labels.push_back(ds.labels[i]);
    return p;
  };
  split.train = gather(split.indices.train);
  split.validation = gather(split.indices.validation);
  split.test = gather(split.indices.test);
  split.scaler = fit_scaler(split.train.features);
  split.train.features = apply_scaler(split.scaler, split.train.features);
  split.validation.features = apply_scaler(split.scaler, split.validation.features);
  split.test.features = apply_scaler(split.scaler, split.test.features);
  return split;
}

std::pair<Matrix, LabelVector> oversample(const Matrix& features, const LabelVector& labels,
                                          std::uint64_t seed) {
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "features and labels disagree on row count");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(ErrorCode::SingleClass, "oversampling needs both classes");
  }
  const int minority = by_class[0].size() < by_class[1].size() ? 0 : 1;
  const std::size_t deficit = by_class[1 - minority].size() - by_class[minority].size();

  Matrix out_x = features;
  LabelVector out_y = labels;
  Rng rng(seed);
  const auto& pool = by_class[minority];
  for (std::size_t k = 0; k < deficit; ++k) {
    const std::size_t src = pool[rng.uniform_index(pool.size())];
    out_x.append_row(features.row(src));
    out_y.push_back(minority);
  }
  return {std::move(out_x), std::move(out_y)};
}

}  // namespace pdvoice
