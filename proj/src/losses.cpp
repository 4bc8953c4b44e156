#include "colordet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "colordet/error.hpp"

namespace colordet {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> target,
                const char* op) {
  if (pred.size() != target.size())
    throw InvalidInput(std::string(op) + ": pred has " + std::to_string(pred.size()) +
                       " elements, target has " + std::to_string(target.size()));
  if (pred.empty()) throw InvalidInput(std::string(op) + ": empty input");
}

void check_beta(double beta, const char* op) {
  if (!(beta > 0)) throw InvalidInput(std::string(op) + ": beta must be > 0");
}

double scale_for(Reduction r, std::size_t n) {
  return r == Reduction::Mean ? 1.0 / static_cast<double>(n) : 1.0;
}

template <typename Term>
double reduce(std::span<const double> pred, std::span<const double> target, Reduction r,
              Term term) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += term(target[i] - pred[i]);
  return sum * scale_for(r, pred.size());
}

template <typename Deriv>
std::vector<double> grad(std::span<const double> pred, std::span<const double> target,
                         Reduction r, Deriv deriv) {
  const double k = scale_for(r, pred.size());
  std::vector<double> g(pred.size());
  // d/dpred = -d/dd since d = target - pred.
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = -deriv(target[i] - pred[i]) * k;
  return g;
}

double knee_term(double d, double beta) {
  const double a = std::abs(d);
  return a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

double knee_deriv(double d, double beta) {
  return std::abs(d) < beta ? d / beta : (d > 0 ? 1.0 : -1.0);
}

double sign(double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); }

/// Validates the batch and returns p_t per row.
std::vector<double> target_probs(std::span<const double> probs, std::size_t num_classes,
                                 std::span<const int> labels, const char* op) {
  if (num_classes == 0) throw InvalidInput(std::string(op) + ": num_classes must be > 0");
  if (labels.empty()) throw InvalidInput(std::string(op) + ": empty batch");
  if (probs.size() != labels.size() * num_classes)
    throw InvalidInput(std::string(op) + ": expected " +
                       std::to_string(labels.size() * num_classes) + " probabilities, got " +
                       std::to_string(probs.size()));
  std::vector<double> pt(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= num_classes)
      throw InvalidInput(std::string(op) + ": label " + std::to_string(labels[r]) +
                         " out of range");
    const double p = probs[r * num_classes + static_cast<std::size_t>(labels[r])];
    if (!(p > 0 && p <= 1))
      throw InvalidInput(std::string(op) + ": probability " + std::to_string(p) +
                         " outside (0, 1]");
    pt[r] = p;
  }
  return pt;
}

}  // namespace

LossConfig LossConfig::for_kind(LossKind kind) {
  LossConfig cfg;
  cfg.kind = kind;
  cfg.beta = kind == LossKind::SmoothL1 ? 1.0 : kVcrBeta;
  return cfg;
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "vcr") return LossKind::Vcr;
  if (name == "smooth_l1") return LossKind::SmoothL1;
  if (name == "l1") return LossKind::L1;
  if (name == "mse") return LossKind::Mse;
  if (name == "ce") return LossKind::CrossEntropy;
  if (name == "focal") return LossKind::Focal;
  throw InvalidInput("unknown loss kind '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Vcr: return "vcr";
    case LossKind::SmoothL1: return "smooth_l1";
    case LossKind::L1: return "l1";
    case LossKind::Mse: return "mse";
    case LossKind::CrossEntropy: return "ce";
    case LossKind::Focal: return "focal";
  }
  return "?";
}

bool is_classification(LossKind kind) noexcept {
  return kind == LossKind::CrossEntropy || kind == LossKind::Focal;
}

double vcr_loss(std::span<const double> pred, std::span<const double> target, double beta,
                Reduction reduction) {
  check_pair(pred, target, "vcr_loss");
  check_beta(beta, "vcr_loss");
  return reduce(pred, target, reduction, [beta](double d) { return knee_term(d, beta); });
}

std::vector<double> vcr_loss_grad(std::span<const double> pred,
                                  std::span<const double> target, double beta,
                                  Reduction reduction) {
  check_pair(pred, target, "vcr_loss_grad");
  check_beta(beta, "vcr_loss_grad");
  return grad(pred, target, reduction, [beta](double d) { return knee_deriv(d, beta); });
}

double smooth_l1_loss(std::span<const double> pred, std::span<const double> target,
                      double beta, Reduction reduction) {
  return vcr_loss(pred, target, beta, reduction);
}

std::vector<double> smooth_l1_loss_grad(std::span<const double> pred,
                                        std::span<const double> target, double beta,
                                        Reduction reduction) {
  return vcr_loss_grad(pred, target, beta, reduction);
}

double l1_loss(std::span<const double> pred, std::span<const double> target,
               Reduction reduction) {
  check_pair(pred, target, "l1_loss");
  return reduce(pred, target, reduction, [](double d) { return std::abs(d); });
}

std::vector<double> l1_loss_grad(std::span<const double> pred,
                                 std::span<const double> target, Reduction reduction) {
  check_pair(pred, target, "l1_loss_grad");
  return grad(pred, target, reduction, sign);
}

double mse_loss(std::span<const double> pred, std::span<const double> target,
                Reduction reduction) {
  check_pair(pred, target, "mse_loss");
  return reduce(pred, target, reduction, [](double d) { return d * d; });
}

std::vector<double> mse_loss_grad(std::span<const double> pred,
                                  std::span<const double> target, Reduction reduction) {
  check_pair(pred, target, "mse_loss_grad");
  return grad(pred, target, reduction, [](double d) { return 2.0 * d; });
}

double cross_entropy_loss(std::span<const double> probs, std::size_t num_classes,
                          std::span<const int> labels, Reduction reduction) {
  const auto pt = target_probs(probs, num_classes, labels, "cross_entropy_loss");
  double sum = 0.0;
  for (double p : pt) sum -= std::log(p);
  return sum * scale_for(reduction, pt.size());
}

std::vector<double> cross_entropy_loss_grad(std::span<const double> probs,
                                            std::size_t num_classes,
                                            std::span<const int> labels,
                                            Reduction reduction) {
  const auto pt = target_probs(probs, num_classes, labels, "cross_entropy_loss_grad");
  const double k = scale_for(reduction, pt.size());
  std::vector<double> g(probs.size(), 0.0);
  for (std::size_t r = 0; r < pt.size(); ++r)
    g[r * num_classes + static_cast<std::size_t>(labels[r])] = -k / pt[r];
  return g;
}

double focal_loss(std::span<const double> probs, std::size_t num_classes,
                  std::span<const int> labels, double gamma, double alpha_bal,
                  Reduction reduction) {
  if (!(gamma >= 0)) throw InvalidInput("focal_loss: gamma must be >= 0");
  if (!(alpha_bal > 0 && alpha_bal <= 1))
    throw InvalidInput("focal_loss: alpha must lie in (0, 1]");
  const auto pt = target_probs(probs, num_classes, labels, "focal_loss");
  double sum = 0.0;
  for (double p : pt) sum -= alpha_bal * std::pow(1.0 - p, gamma) * std::log(p);
  return sum * scale_for(reduction, pt.size());
}

std::vector<double> focal_loss_grad(std::span<const double> probs, std::size_t num_classes,
                                    std::span<const int> labels, double gamma,
                                    double alpha_bal, Reduction reduction) {
  if (!(gamma >= 0)) throw InvalidInput("focal_loss_grad: gamma must be >= 0");
  if (!(alpha_bal > 0 && alpha_bal <= 1))
    throw InvalidInput("focal_loss_grad: alpha must lie in (0, 1]");
  const auto pt = target_probs(probs, num_classes, labels, "focal_loss_grad");
  const double k = scale_for(reduction, pt.size());
  std::vector<double> g(probs.size(), 0.0);
  for (std::size_t r = 0; r < pt.size(); ++r) {
    const double p = pt[r];
    const double q = 1.0 - p;
    // d/dp [-a q^g ln p] = a g q^(g-1) ln p - a q^g / p; the first term
    // vanishes at p = 1 for every gamma >= 0.
    const double first = (gamma == 0 || q == 0) ? 0.0
                                                : alpha_bal * gamma * std::pow(q, gamma - 1) *
                                                      std::log(p);
    g[r * num_classes + static_cast<std::size_t>(labels[r])] =
        (first - alpha_bal * std::pow(q, gamma) / p) * k;
  }
  return g;
}

std::vector<double> softmax(std::span<const double> logits, std::size_t num_classes) {
  if (num_classes == 0 || logits.size() % num_classes != 0)
    throw InvalidInput("softmax: logits length must be a multiple of num_classes");
  std::vector<double> out(logits.size());
  for (std::size_t r = 0; r < logits.size(); r += num_classes) {
    const auto row = logits.subspan(r, num_classes);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) sum += out[r + c] = std::exp(row[c] - mx);
    for (std::size_t c = 0; c < num_classes; ++c) out[r + c] /= sum;
  }
  return out;
}

double baseline_loss(const LossConfig& cfg, std::span<const double> pred,
                     std::span<const double> target) {
  switch (cfg.kind) {
    case LossKind::Vcr:
    case LossKind::SmoothL1: return vcr_loss(pred, target, cfg.beta, cfg.reduction);
    case LossKind::L1: return l1_loss(pred, target, cfg.reduction);
    case LossKind::Mse: return mse_loss(pred, target, cfg.reduction);
    default: break;
  }
  throw InvalidInput("baseline_loss: " + std::string(loss_kind_name(cfg.kind)) +
                     " needs probabilities and class labels");
}

std::vector<double> baseline_loss_grad(const LossConfig& cfg, std::span<const double> pred,
                                       std::span<const double> target) {
  switch (cfg.kind) {
    case LossKind::Vcr:
    case LossKind::SmoothL1: return vcr_loss_grad(pred, target, cfg.beta, cfg.reduction);
    case LossKind::L1: return l1_loss_grad(pred, target, cfg.reduction);
    case LossKind::Mse: return mse_loss_grad(pred, target, cfg.reduction);
    default: break;
  }
  throw InvalidInput("baseline_loss_grad: " + std::string(loss_kind_name(cfg.kind)) +
                     " needs probabilities and class labels");
}

double baseline_loss(const LossConfig& cfg, std::span<const double> probs,
                     std::size_t num_classes, std::span<const int> labels) {
  if (cfg.kind == LossKind::CrossEntropy)
    return cross_entropy_loss(probs, num_classes, labels, cfg.reduction);
  if (cfg.kind == LossKind::Focal)
    return focal_loss(probs, num_classes, labels, cfg.gamma, cfg.alpha_bal, cfg.reduction);
  throw InvalidInput("baseline_loss: " + std::string(loss_kind_name(cfg.kind)) +
                     " is a regression loss");
}

std::vector<double> baseline_loss_grad(const LossConfig& cfg, std::span<const double> probs,
                                       std::size_t num_classes, std::span<const int> labels) {
  if (cfg.kind == LossKind::CrossEntropy)
    return cross_entropy_loss_grad(probs, num_classes, labels, cfg.reduction);
  if (cfg.kind == LossKind::Focal)
    return focal_loss_grad(probs, num_classes, labels, cfg.gamma, cfg.alpha_bal,
                           cfg.reduction);
  throw InvalidInput("baseline_loss_grad: " + std::string(loss_kind_name(cfg.kind)) +
                     " is a regression loss");
}

}  // namespace colordet
