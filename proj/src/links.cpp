#include "bgeva/links.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bgeva/error.hpp"

namespace bgeva {

namespace {

// u = -ln(PD) and its eta derivatives for the extreme-value families.
struct ExtremeU {
  double u, du, d2u;
};

ExtremeU extreme_u(const LinkKind& link, double eta) {
  if (link.family == LinkFamily::loglog) {
    const double u = std::exp(-eta);
    return {u, -u, u};
  }
  const double tau = link.tau;
  const double s = 1.0 + tau * eta;
  if (!(s >= link.domain_eps)) {
    std::ostringstream msg;
    msg << "gev predictor outside support: 1 + tau*eta = " << s << " (tau=" << tau << ", eta=" << eta << ")";
    throw DomainError(msg.str(), {}, eta);
  }
  const double ls = std::log(s);
  const double u = std::exp(-ls / tau);
  const double du = -std::exp((-1.0 / tau - 1.0) * ls);
  const double d2u = (1.0 + tau) * std::exp((-1.0 / tau - 2.0) * ls);
  return {u, du, d2u};
}

double clamp_prob(double p) { return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor); }

}  // namespace

LinkKind LinkKind::gev(double tau, double eps) {
  if (!(std::abs(tau) >= kMinAbsTau)) {
    std::ostringstream msg;
    msg << "gev link requires |tau| >= " << kMinAbsTau << " (got " << tau << "); use loglog for the Gumbel limit";
    throw ConfigError(msg.str());
  }
  if (!(eps > 0.0)) throw ConfigError("gev domain epsilon must be positive");
  return {LinkFamily::gev, tau, eps};
}

LinkKind LinkKind::parse(const std::string& text) {
  if (text == "logit") return logit();
  if (text == "loglog") return loglog();
  if (text.rfind("gev", 0) == 0) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("gev link needs a tail parameter, e.g. gev:-0.25");
    try {
      std::size_t used = 0;
      const std::string num = text.substr(colon + 1);
      const double tau = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      return gev(tau);
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse gev tail parameter in '" + text + "'");
    }
  }
  throw ConfigError("unknown link '" + text + "' (expected gev:<tau>, logit or loglog)");
}

std::string LinkKind::to_string() const {
  switch (family) {
    case LinkFamily::logit:
      return "logit";
    case LinkFamily::loglog:
      return "loglog";
    case LinkFamily::gev: {
      std::ostringstream out;
      out << "gev:" << tau;
      return out.str();
    }
  }
  return "?";
}

double LinkKind::support(double eta) const {
  if (family != LinkFamily::gev) return std::numeric_limits<double>::infinity();
  return 1.0 + tau * eta;
}

double LinkKind::boundary_eta() const {
  if (family != LinkFamily::gev) {
    return std::numeric_limits<double>::infinity();
  }
  // 1 + tau*eta = 2*eps keeps the clamped point strictly inside.
  return (2.0 * domain_eps - 1.0) / tau;
}

double inverse_link(const LinkKind& link, double eta) {
  switch (link.family) {
    case LinkFamily::logit:
      return clamp_prob(1.0 / (1.0 + std::exp(-eta)));
    case LinkFamily::loglog:
    case LinkFamily::gev:
      return clamp_prob(std::exp(-extreme_u(link, eta).u));
  }
  return 0.0;
}

double link(const LinkKind& link, double pd) {
  if (!(pd > 0.0 && pd < 1.0)) {
    std::ostringstream msg;
    msg << "probability outside (0,1): " << pd;
    throw DomainError(msg.str());
  }
  switch (link.family) {
    case LinkFamily::logit:
      return std::log(pd) - std::log1p(-pd);
    case LinkFamily::loglog:
      return -std::log(-std::log(pd));
    case LinkFamily::gev:
      return (std::pow(-std::log(pd), -link.tau) - 1.0) / link.tau;
  }
  return 0.0;
}

ResponseDerivs response_derivs(const LinkKind& link, double eta) {
  if (link.family == LinkFamily::logit) {
    const double p = 1.0 / (1.0 + std::exp(-eta));
    const double v = p * (1.0 - p);
    return {v, v * (1.0 - 2.0 * p)};
  }
  const auto [u, du, d2u] = extreme_u(link, eta);
  const double p = std::exp(-u);
  return {-du * p, p * (du * du - d2u)};
}

ObservationTerms observation_terms(const LinkKind& link, double y, double eta) {
  if (link.family == LinkFamily::logit) {
    // log(1 + e^eta) without overflow
    const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    const double p = 1.0 / (1.0 + std::exp(-eta));
    return {y * eta - softplus, y - p, -p * (1.0 - p)};
  }
  const auto [u, du, d2u] = extreme_u(link, eta);
  if (y > 0.5) return {-u, -du, -d2u};
  const double em1 = std::expm1(u);     // e^u - 1
  const double one_minus_p = -std::expm1(-u);
  return {std::log(one_minus_p), du / em1, d2u / em1 - du * du / (em1 * one_minus_p)};
}

}  // namespace bgeva
