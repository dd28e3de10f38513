#include "pdvoice/learners.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "pdvoice/dnn.hpp"
#include "pdvoice/error.hpp"
#include "pdvoice/gradient_boosting.hpp"
#include "pdvoice/logistic_regression.hpp"
#include "pdvoice/random.hpp"
#include "pdvoice/random_forest.hpp"
#include "pdvoice/svm.hpp"

namespace pdvoice {

std::string_view model_id(ModelKind kind) {
  switch (kind) {
    case ModelKind::Dnn: return "dnn";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::Svm: return "svm";
    case ModelKind::GradientBoosting: return "gb";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view id) {
  for (ModelKind k : kAllModelKinds) {
    if (model_id(k) == id) return k;
  }
  return std::nullopt;
}

std::string valid_model_ids() {
  std::string out;
  for (ModelKind k : kAllModelKinds) {
    if (!out.empty()) out += ", ";
    out += model_id(k);
  }
  return out;
}

ClassifierSpec ClassifierSpec::defaults(ModelKind kind) {
  switch (kind) {
    case ModelKind::Dnn: return {kind, DnnParams{}};
    case ModelKind::RandomForest: return {kind, ForestParams{}};
    case ModelKind::LogisticRegression: return {kind, LogRegParams{}};
    case ModelKind::Svm: return {kind, SvmParams{}};
    case ModelKind::GradientBoosting: return {kind, BoostingParams{}};
  }
  return {};
}

void ClassifierSpec::validate() const {
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string(model_id(kind)) + ": " + what);
  };
  switch (kind) {
    case ModelKind::LogisticRegression: {
      const auto* p = std::get_if<LogRegParams>(&params);
      require(p != nullptr, "expected logistic-regression parameters");
      require(p->C > 0.0, "C must be positive");
      require(p->max_iter >= 1, "max_iter must be >= 1");
      require(p->tolerance > 0.0, "tolerance must be positive");
      require(p->history >= 1, "history must be >= 1");
      break;
    }
    case ModelKind::Svm: {
      const auto* p = std::get_if<SvmParams>(&params);
      require(p != nullptr, "expected SVM parameters");
      require(p->C > 0.0, "C must be positive");
      require(!p->gamma || *p->gamma > 0.0, "gamma must be positive");
      require(p->tolerance > 0.0, "tolerance must be positive");
      require(p->max_passes >= 1, "max_passes must be >= 1");
      break;
    }
    case ModelKind::RandomForest: {
      const auto* p = std::get_if<ForestParams>(&params);
      require(p != nullptr, "expected random-forest parameters");
      require(p->n_trees >= 1, "n_trees must be >= 1");
      require(p->max_depth >= 0, "max_depth must be >= 0");
      require(p->min_samples_split >= 2, "min_samples_split must be >= 2");
      require(p->max_features >= 0, "max_features must be >= 0");
      break;
    }
    case ModelKind::GradientBoosting: {
      const auto* p = std::get_if<BoostingParams>(&params);
      require(p != nullptr, "expected gradient-boosting parameters");
      require(p->n_estimators >= 1, "n_estimators must be >= 1");
      require(p->learning_rate > 0.0, "learning_rate must be positive");
      require(p->max_depth >= 1, "max_depth must be >= 1");
      break;
    }
    case ModelKind::Dnn: {
      const auto* p = std::get_if<DnnParams>(&params);
      require(p != nullptr, "expected DNN parameters");
      require(p->input_dim >= 0, "input_dim must be >= 0");
      require(!p->hidden.empty(), "at least one hidden layer");
      require(std::all_of(p->hidden.begin(), p->hidden.end(), [](int w) { return w >= 1; }),
              "hidden widths must be >= 1");
      require(p->dropout >= 0.0 && p->dropout < 1.0, "dropout must be in [0, 1)");
      require(p->learning_rate > 0.0, "learning_rate must be positive");
      require(p->weight_decay >= 0.0, "weight_decay must be >= 0");
      require(p->epochs >= 1 && p->batch_size >= 1 && p->patience >= 1,
              "epochs, batch_size and patience must be >= 1");
      break;
    }
  }
}

LabelVector TrainedModel::predict(const Matrix& m) const {
  if (m.rows() == 0) return {};
  if (m.cols() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(input_dim()) +
                                                  " features, got " + std::to_string(m.cols()));
  }
  return predict_rows(m);
}

void TrainedModel::save(std::ostream& out) const {
  out.precision(17);
  out << "pdvoice-model format_version=1 kind=" << model_id(kind()) << " input_dim=" << input_dim()
      << '\n';
  save_body(out);
}

void check_training_data(const Matrix& x, const LabelVector& y) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "features and labels disagree on row count");
  }
  if (x.rows() < 2) throw Error(ErrorCode::DegenerateData, "need at least two training rows");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
  if (!has0 || !has1) throw Error(ErrorCode::DegenerateData, "training data has a single class");
  const auto first = x.row(0);
  bool all_same = true;
  for (std::size_t r = 1; r < x.rows() && all_same; ++r) {
    all_same = std::equal(first.begin(), first.end(), x.row(r).begin());
  }
  if (all_same) throw Error(ErrorCode::DegenerateData, "all training rows are identical");
}

std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, LabeledView train,
                                  std::optional<LabeledView> validation, std::uint64_t seed) {
  spec.validate();
  check_training_data(train.features, train.labels);
  const auto start = std::chrono::steady_clock::now();
  std::unique_ptr<TrainedModel> model;
  switch (spec.kind) {
    case ModelKind::LogisticRegression:
      model = train_logreg(train.features, train.labels, std::get<LogRegParams>(spec.params));
      break;
    case ModelKind::Svm:
      model = train_svm_smo(train.features, train.labels, std::get<SvmParams>(spec.params));
      break;
    case ModelKind::RandomForest:
      model = train_random_forest(train.features, train.labels, std::get<ForestParams>(spec.params), seed);
      break;
    case ModelKind::GradientBoosting:
      model = train_gradient_boosting(train.features, train.labels, std::get<BoostingParams>(spec.params));
      break;
    case ModelKind::Dnn: {
      if (!validation) {
        throw Error(ErrorCode::InvalidArgument, "the DNN needs validation data for early stopping");
      }
      model = train_dnn(train.features, train.labels, validation->features, validation->labels,
                        std::get<DnnParams>(spec.params), seed);
      break;
    }
  }
  model->mutable_info().train_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return model;
}

}  // namespace pdvoice
