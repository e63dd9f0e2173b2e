#include "prefforge/losses.hpp"

#include <cmath>

#include "prefforge/errors.hpp"

namespace prefforge::losses {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw Error(std::string(what) + " must be finite");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Beta::Beta(double v) : value(v) {
  require_finite(v, "beta");
  if (!(v > 0.0)) throw Error("beta must be > 0");
}

double log_sigmoid(double x) {
  require_finite(x, "log_sigmoid input");
  // ln sigma(x) = -softplus(-x); split on sign so exp never overflows.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double dpo_margin(const LogProbQuad& q, Beta beta) {
  require_finite(q.lp_chosen_policy, "lp_chosen_policy");
  require_finite(q.lp_chosen_ref, "lp_chosen_ref");
  require_finite(q.lp_rejected_policy, "lp_rejected_policy");
  require_finite(q.lp_rejected_ref, "lp_rejected_ref");
  const double delta_chosen = q.lp_chosen_policy - q.lp_chosen_ref;
  const double delta_rejected = q.lp_rejected_policy - q.lp_rejected_ref;
  return beta.value * (delta_chosen - delta_rejected);
}

double dpo_loss(const LogProbQuad& q, Beta beta) {
  return -log_sigmoid(dpo_margin(q, beta));
}

DpoGradient dpo_gradient(const LogProbQuad& q, Beta beta) {
  const double m = dpo_margin(q, beta);
  const double g = beta.value * sigmoid(-m);
  return DpoGradient{-g, +g};
}

double prm_pairwise_loss(double score_chosen, double score_rejected) {
  require_finite(score_chosen, "score_chosen");
  require_finite(score_rejected, "score_rejected");
  return -log_sigmoid(score_chosen - score_rejected);
}

PrmGradient prm_pairwise_gradient(double score_chosen, double score_rejected) {
  require_finite(score_chosen, "score_chosen");
  require_finite(score_rejected, "score_rejected");
  const double g = sigmoid(-(score_chosen - score_rejected));
  return PrmGradient{-g, +g};
}

}  // namespace prefforge::losses
