#pragma once

#include "graspda/features.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace graspda {

struct SvmParams {
  double c_reg = 1.0;
  int max_iter = 10000;
  double tol = 1e-6;
};

// One binary machine of the one-vs-rest ensemble, in standardized feature
// space. The bias is the last entry of the augmented weight vector and is
// regularized together with the weights.
struct BinaryMachine {
  int class_label = 1;
  Eigen::VectorXd w;
  double b = 0.0;
  int iterations = 0;
  // Best objective seen up to each iteration (non-increasing).
  std::vector<double> objective_trace;
};

// Trains a weighted L2-regularized hinge-loss machine by full-batch projected
// subgradient descent with step 1/(lambda t), lambda = 1/c_reg. Objective:
//   lambda/2 |v|^2 + sum_i omega_i max(0, 1 - y_i v.[x_i, 1])
// with omega = 0.5/n_pos on positives and 0.5/n_neg on negatives. Returns the
// best iterate.
BinaryMachine train_binary(const Matrix& x, std::span<const int> y, const SvmParams& params);

struct LinearModel {
  std::vector<int> classes;               // ascending
  Matrix weights;                         // classes x selected
  Eigen::VectorXd biases;                 // classes
  Eigen::VectorXd mean;                   // selected
  Eigen::VectorXd stddev;                 // selected, floored
  std::vector<std::uint32_t> selected;    // indices into the raw feature vector
  std::uint32_t input_dim = 0;
};

// `selected` empty means all features.
LinearModel train(std::span<const FeatureVector> features, std::span<const int> classes, const SvmParams& params,
                  std::span<const std::size_t> selected = {});

struct Prediction {
  int class_label = 1;
  Eigen::VectorXd scores;  // one per model class, ascending class order
};

Prediction predict(const LinearModel& model, const FeatureVector& feature);

// Binary model blob, little-endian: "GDMD" | u16 version | u32 n_classes |
// u32 input_dim | u32 n_selected | u32 selected[] | f64 mean[] | f64 std[] |
// per class: i32 label, f64 w[n_selected], f64 bias.
inline constexpr std::uint16_t kModelVersion = 1;
void write_model(std::ostream& out, const LinearModel& model);
LinearModel read_model(std::istream& in);

}  // namespace graspda
