#pragma once

#include <string>

namespace bgeva {

enum class LinkFamily { gev, logit, loglog };

// A member of the link family. For gev, `tau` is the tail parameter; the
// Gumbel case tau -> 0 is the separate loglog family.
struct LinkKind {
  LinkFamily family = LinkFamily::logit;
  double tau = 0.0;
  double domain_eps = 1e-6;

  static LinkKind gev(double tau, double eps = 1e-6);
  static LinkKind logit() { return {LinkFamily::logit, 0.0, 1e-6}; }
  static LinkKind loglog() { return {LinkFamily::loglog, 0.0, 1e-6}; }

  // "gev:-0.25", "logit", "loglog"
  static LinkKind parse(const std::string& text);
  std::string to_string() const;

  bool is_gev() const { return family == LinkFamily::gev; }

  // 1 + tau*eta for gev, +inf otherwise.
  double support(double eta) const;
  bool feasible(double eta) const { return support(eta) >= domain_eps; }

  // Largest (tau < 0) or smallest (tau > 0) feasible eta, pulled inside by eps.
  double boundary_eta() const;

  friend bool operator==(const LinkKind&, const LinkKind&) = default;
};

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kMinAbsTau = 1e-3;

struct ResponseDerivs {
  double first;
  double second;
};

// Probability of the event, clamped to [1e-12, 1 - 1e-12]. Throws DomainError
// when a gev predictor falls outside the support.
double inverse_link(const LinkKind& link, double eta);

// Quantile form: maps a probability in (0,1) to the linear predictor.
double link(const LinkKind& link, double pd);

// dPD/deta and d2PD/deta2 (unclamped analytic forms).
ResponseDerivs response_derivs(const LinkKind& link, double eta);

// Per-observation log-likelihood contribution and its first two eta
// derivatives. Uses the numerically stable forms of each family; no clamping.
struct ObservationTerms {
  double loglik;
  double d1;
  double d2;
};
ObservationTerms observation_terms(const LinkKind& link, double y, double eta);

}  // namespace bgeva
