#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pdvoice/matrix.hpp"

namespace pdvoice {

enum class ModelKind { Dnn, RandomForest, LogisticRegression, Svm, GradientBoosting };

/// All kinds in reporting order.
inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::Dnn, ModelKind::RandomForest, ModelKind::LogisticRegression, ModelKind::Svm,
    ModelKind::GradientBoosting};

/// Short identifier used in files and on the command line: dnn, rf, lr, svm, gb.
std::string_view model_id(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view id);
/// "dnn, rf, lr, svm, gb"
std::string valid_model_ids();

struct LogRegParams {
  double C = 1.0;
  int max_iter = 1000;
  double tolerance = 1e-6;  // on the max-abs gradient entry
  int history = 10;
};

struct SvmParams {
  double C = 1.0;
  /// nullopt selects 1 / (d * var(X)) over all training entries.
  std::optional<double> gamma;
  double tolerance = 1e-3;
  /// One pass = n pair updates.
  int max_passes = 10000;
};

struct ForestParams {
  int n_trees = 100;
  /// 0 = grow until pure.
  int max_depth = 0;
  int min_samples_split = 2;
  /// 0 = ceil(sqrt(d)).
  int max_features = 0;
};

struct BoostingParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
};

struct DnnParams {
  /// 0 = take the training matrix width.
  int input_dim = 0;
  std::vector<int> hidden{64, 32};
  double dropout = 0.30;
  double learning_rate = 0.003;
  double weight_decay = 0.001;
  int epochs = 100;
  int batch_size = 32;
  int patience = 15;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using HyperParams = std::variant<LogRegParams, SvmParams, ForestParams, BoostingParams, DnnParams>;

struct ClassifierSpec {
  ModelKind kind = ModelKind::LogisticRegression;
  HyperParams params = LogRegParams{};

  static ClassifierSpec defaults(ModelKind kind);
  /// Throws Error(InvalidArgument) for out-of-range hyperparameters or a
  /// params alternative that does not match the kind.
  void validate() const;
};

struct TrainingInfo {
  int iterations = 0;
  bool converged = true;
  bool early_stopped = false;
  int best_epoch = -1;
  std::vector<double> validation_loss;
  std::vector<double> stage_loss;
  double train_ms = 0.0;
};

/// Fitted classifier. Immutable once returned from fit(); predict may be
/// called concurrently.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t input_dim() const = 0;

  /// One label in {0, 1} per row. Throws Error(DimensionMismatch).
  LabelVector predict(const Matrix& m) const;

  /// Line-oriented text dump headed by `pdvoice-model format_version=1`.
  void save(std::ostream& out) const;

  const TrainingInfo& info() const { return info_; }
  TrainingInfo& mutable_info() { return info_; }

 protected:
  virtual LabelVector predict_rows(const Matrix& m) const = 0;
  virtual void save_body(std::ostream& out) const = 0;

  TrainingInfo info_;
};

struct LabeledView {
  const Matrix& features;
  const LabelVector& labels;
};

/// Trains the classifier described by spec. Deterministic in
/// (spec, data, seed). Validation data is required for the DNN (early
/// stopping) and ignored otherwise.
///
/// Throws Error(DegenerateData) when training data has a single class or
/// every row is identical.
std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, LabeledView train,
                                  std::optional<LabeledView> validation, std::uint64_t seed);

/// Shared precondition check used by every trainer.
void check_training_data(const Matrix& x, const LabelVector& y);

}  // namespace pdvoice
