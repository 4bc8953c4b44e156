#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace colordet {

enum class LossKind { Vcr, SmoothL1, L1, Mse, CrossEntropy, Focal };
enum class Reduction { Mean, Sum };

inline constexpr double kVcrBeta = 0.11;

struct LossConfig {
  LossKind kind = LossKind::Vcr;
  double beta = kVcrBeta;   // vcr / smooth_l1 knee
  double gamma = 2.0;       // focal
  double alpha_bal = 0.25;  // focal
  Reduction reduction = Reduction::Mean;

  /// Default config for a kind: beta 0.11 for vcr, 1 for smooth_l1.
  static LossConfig for_kind(LossKind kind);
};

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);
bool is_classification(LossKind kind) noexcept;

// Regression losses over residuals d_i = target_i - pred_i.

/// Smooth-L1 with the knee at beta: 0.5 d^2 / beta below it, |d| - 0.5 beta
/// at and above it.
double vcr_loss(std::span<const double> pred, std::span<const double> target,
                double beta = kVcrBeta, Reduction reduction = Reduction::Mean);

/// d loss / d pred.
std::vector<double> vcr_loss_grad(std::span<const double> pred,
                                  std::span<const double> target, double beta = kVcrBeta,
                                  Reduction reduction = Reduction::Mean);

double smooth_l1_loss(std::span<const double> pred, std::span<const double> target,
                      double beta = 1.0, Reduction reduction = Reduction::Mean);
std::vector<double> smooth_l1_loss_grad(std::span<const double> pred,
                                        std::span<const double> target, double beta = 1.0,
                                        Reduction reduction = Reduction::Mean);

double l1_loss(std::span<const double> pred, std::span<const double> target,
               Reduction reduction = Reduction::Mean);
/// Uses 0 as the subgradient at d = 0.
std::vector<double> l1_loss_grad(std::span<const double> pred,
                                 std::span<const double> target,
                                 Reduction reduction = Reduction::Mean);

double mse_loss(std::span<const double> pred, std::span<const double> target,
                Reduction reduction = Reduction::Mean);
std::vector<double> mse_loss_grad(std::span<const double> pred,
                                  std::span<const double> target,
                                  Reduction reduction = Reduction::Mean);

// Classification losses over rows of probabilities. `probs` is row-major
// (labels.size() rows, num_classes columns); each used probability must lie
// in (0, 1]. Gradients are d loss / d probs, same layout.

double cross_entropy_loss(std::span<const double> probs, std::size_t num_classes,
                          std::span<const int> labels,
                          Reduction reduction = Reduction::Mean);
std::vector<double> cross_entropy_loss_grad(std::span<const double> probs,
                                            std::size_t num_classes,
                                            std::span<const int> labels,
                                            Reduction reduction = Reduction::Mean);

/// -alpha (1 - p_t)^gamma ln p_t.
double focal_loss(std::span<const double> probs, std::size_t num_classes,
                  std::span<const int> labels, double gamma = 2.0, double alpha_bal = 0.25,
                  Reduction reduction = Reduction::Mean);
std::vector<double> focal_loss_grad(std::span<const double> probs, std::size_t num_classes,
                                    std::span<const int> labels, double gamma = 2.0,
                                    double alpha_bal = 0.25,
                                    Reduction reduction = Reduction::Mean);

/// Row-wise softmax of logits with num_classes columns.
std::vector<double> softmax(std::span<const double> logits, std::size_t num_classes);

// Dispatch by config. The regression forms reject ce/focal and vice versa.
double baseline_loss(const LossConfig& cfg, std::span<const double> pred,
                     std::span<const double> target);
std::vector<double> baseline_loss_grad(const LossConfig& cfg, std::span<const double> pred,
                                       std::span<const double> target);
double baseline_loss(const LossConfig& cfg, std::span<const double> probs,
                     std::size_t num_classes, std::span<const int> labels);
std::vector<double> baseline_loss_grad(const LossConfig& cfg, std::span<const double> probs,
                                       std::size_t num_classes, std::span<const int> labels);

}  // namespace colordet
