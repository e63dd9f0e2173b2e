#ifndef PREFFORGE_LOSSES_HPP_
#define PREFFORGE_LOSSES_HPP_

namespace prefforge::losses {

// Temperature-scaling coefficient of the preference objective. Must be > 0.
struct Beta {
  double value;
  explicit Beta(double v);
};

// Sequence log-probabilities of one preference pair under the trained
// policy and the frozen reference. Callers supply one scalar per
// (response, model); this module never tokenizes.
struct LogProbQuad {
  double lp_chosen_policy;
  double lp_chosen_ref;
  double lp_rejected_policy;
  double lp_rejected_ref;
};

// Gradient of the pair loss with respect to the two policy log-probs.
// Reference log-probs receive zero gradient by construction.
struct DpoGradient {
  double d_chosen_policy;
  double d_rejected_policy;
};

struct PrmGradient {
  double d_chosen;
  double d_rejected;
};

// ln sigma(x), overflow-free via ln sigma(x) = -softplus(-x).
double log_sigmoid(double x);

// beta * [(lp_c_pol - lp_c_ref) - (lp_r_pol - lp_r_ref)], the implicit
// reward margin of the pair.
double dpo_margin(const LogProbQuad& q, Beta beta);

// -ln sigma(margin). Batch reduction is the arithmetic mean of pair losses.
double dpo_loss(const LogProbQuad& q, Beta beta);

DpoGradient dpo_gradient(const LogProbQuad& q, Beta beta);

// Pairwise ranking loss for the step scorer: -ln sigma(s_chosen - s_rejected).
double prm_pairwise_loss(double score_chosen, double score_rejected);

PrmGradient prm_pairwise_gradient(double score_chosen, double score_rejected);

}  // namespace prefforge::losses

#endif  // PREFFORGE_LOSSES_HPP_
