#include "rootflow/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rootflow/errors.hpp"

namespace rootflow {

namespace {

struct KindName {
  FamilyTag::Kind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {FamilyTag::Kind::UnitCircle, "unit-circle"},
    {FamilyTag::Kind::TaylorDisk, "taylor"},
    {FamilyTag::Kind::CircularBrown, "circular"},
    {FamilyTag::Kind::HaarSum, "haar-sum"},
    {FamilyTag::Kind::CompressedUnitary, "compressed-unitary"},
    {FamilyTag::Kind::KacDerivative, "kac-derivative"},
    {FamilyTag::Kind::Stable, "stable"},
    {FamilyTag::Kind::CommutatorCirculars, "commutator-circulars"},
    {FamilyTag::Kind::EllipticLimit, "elliptic-limit"},
};

// Parameter names in positional order for each kind.
std::vector<std::string> param_names(FamilyTag::Kind kind) {
  switch (kind) {
    case FamilyTag::Kind::HaarSum: return {"k"};
    case FamilyTag::Kind::CompressedUnitary: return {"lambda"};
    case FamilyTag::Kind::KacDerivative: return {"t"};
    case FamilyTag::Kind::Stable: return {"alpha", "theta"};
    case FamilyTag::Kind::EllipticLimit: return {"w"};
    default: return {};
  }
}

double* param_slot(FamilyTag& tag, std::string_view name) {
  if (name == "k") return &tag.k;
  if (name == "lambda") return &tag.lambda;
  if (name == "t") return &tag.t;
  if (name == "alpha") return &tag.alpha;
  if (name == "theta") return &tag.theta;
  if (name == "w") return &tag.w;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::config,
          "bad family parameter '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string FamilyTag::to_string() const {
  std::string out;
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) out = kn.name;
  }
  const auto names = param_names(kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += i == 0 ? ':' : ',';
    FamilyTag copy = *this;
    out += names[i] + "=" + format_double(*param_slot(copy, names[i]));
  }
  return out;
}

FamilyTag FamilyTag::parse(std::string_view name, std::string_view params) {
  std::string_view head = name;
  std::string joined;
  if (const auto colon = name.find(':'); colon != std::string_view::npos) {
    head = name.substr(0, colon);
    joined = std::string(name.substr(colon + 1));
  }
  if (!params.empty()) {
    if (!joined.empty()) joined += ',';
    joined += std::string(params);
  }

  FamilyTag tag;
  bool found = false;
  for (const auto& kn : kKindNames) {
    if (head == kn.name) {
      tag.kind = kn.kind;
      found = true;
    }
  }
  if (!found) {
    std::string known;
    for (const auto& kn : kKindNames) known += (known.empty() ? "" : ", ") + std::string(kn.name);
    fail(ErrorCode::config, "unknown family '" + std::string(head) + "' (known: " + known + ")");
  }

  const auto names = param_names(tag.kind);
  std::size_t position = 0;
  std::string_view rest = joined;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    if (const auto eq = item.find('='); eq != std::string_view::npos) {
      double* slot = param_slot(tag, trim(item.substr(0, eq)));
      const auto key = std::string(trim(item.substr(0, eq)));
      require(slot != nullptr &&
                  std::find(names.begin(), names.end(), key) != names.end(),
              ErrorCode::config,
              "family '" + std::string(head) + "' has no parameter '" + key + "'");
      *slot = parse_number(item.substr(eq + 1));
    } else {
      require(position < names.size(), ErrorCode::config,
              "too many parameters for family '" + std::string(head) + "'");
      *param_slot(tag, names[position++]) = parse_number(item);
    }
  }
  catalog::validate(tag);
  return tag;
}

std::vector<std::string> family_names() {
  std::vector<std::string> out;
  for (const auto& kn : kKindNames) out.emplace_back(kn.name);
  return out;
}

namespace catalog {

void validate(const FamilyTag& tag) {
  using K = FamilyTag::Kind;
  switch (tag.kind) {
    case K::HaarSum:
      require(tag.k > 1.0 && std::isfinite(tag.k), ErrorCode::domain,
              "haar-sum requires k > 1");
      break;
    case K::CompressedUnitary:
      require(tag.lambda > 0.0 && tag.lambda < 1.0, ErrorCode::domain,
              "compressed-unitary requires lambda in (0,1)");
      break;
    case K::KacDerivative:
      require(tag.t > 0.0 && tag.t < 1.0, ErrorCode::domain,
              "kac-derivative requires t in (0,1)");
      break;
    case K::Stable:
      require(tag.alpha > 0.0 && tag.alpha <= 2.0, ErrorCode::domain,
              "stable requires alpha in (0,2]");
      require(tag.theta > 0.0 && std::isfinite(tag.theta), ErrorCode::domain,
              "stable requires theta > 0");
      break;
    case K::EllipticLimit:
      require(tag.w >= 0.0 && std::isfinite(tag.w), ErrorCode::domain,
              "elliptic-limit requires w >= 0");
      break;
    default:
      break;
  }
}

double family_quantile(const FamilyTag& tag, double p) {
  return family_quantile(tag, p, 1.0 - p);
}

double family_quantile(const FamilyTag& tag, double p, double pc) {
  using K = FamilyTag::Kind;
  switch (tag.kind) {
    case K::UnitCircle:
      return 1.0;
    case K::TaylorDisk:
      return p;
    case K::CircularBrown:
      return std::sqrt(p);
    case K::HaarSum:
      // Inverse of F(r) = (k-1) r^2 / (k^2 - r^2).
      return tag.k * std::sqrt(p / (tag.k - pc));
    case K::CompressedUnitary:
      // Inverse of F(r) = ((1-l)/l) r^2 / (1 - r^2) on [0, sqrt(l)].
      return std::sqrt(p * tag.lambda / (1.0 - pc * tag.lambda));
    case K::KacDerivative:
      // Inverse of F(r) = (t/(1-t)) r / (1 - r) on [0, 1-t].
      return p * (1.0 - tag.t) / (p * (1.0 - tag.t) + tag.t);
    case K::Stable:
      return tag.theta * p / std::pow(pc, 2.0 / tag.alpha - 1.0);
    case K::CommutatorCirculars:
      // Inverse of F(r) = (-1 + sqrt(1 + 4 r^2)) / 2.
      return std::sqrt(p * (1.0 + p));
    case K::EllipticLimit:
      return p / std::pow(pc, tag.w);
  }
  return 0.0;
}

double family_cdf(const FamilyTag& tag, double r) {
  using K = FamilyTag::Kind;
  require(r >= 0.0, ErrorCode::domain, "cdf radius must be nonnegative");
  switch (tag.kind) {
    case K::UnitCircle:
      return r >= 1.0 ? 1.0 : 0.0;
    case K::TaylorDisk:
      return std::min(r, 1.0);
    case K::CircularBrown:
      return std::min(r * r, 1.0);
    case K::HaarSum: {
      const double k = tag.k;
      if (r * r >= k) return 1.0;
      return (k - 1.0) * r * r / (k * k - r * r);
    }
    case K::CompressedUnitary: {
      const double l = tag.lambda;
      if (r * r >= l) return 1.0;
      return (1.0 - l) / l * r * r / (1.0 - r * r);
    }
    case K::KacDerivative: {
      const double t = tag.t;
      if (r >= 1.0 - t) return 1.0;
      return t / (1.0 - t) * r / (1.0 - r);
    }
    case K::CommutatorCirculars:
      if (r * r >= 2.0) return 1.0;
      return (-1.0 + std::sqrt(1.0 + 4.0 * r * r)) / 2.0;
    case K::Stable:
    case K::EllipticLimit: {
      // No elementary inverse in general; bisection on the quantile.
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 200 && std::nextafter(lo, 1.0) < hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (family_quantile(tag, mid) <= r ? lo : hi) = mid;
      }
      return lo;
    }
  }
  return 0.0;
}

RadialQuantile make(const FamilyTag& tag, std::vector<double> grid) {
  validate(tag);
  return RadialQuantile::from_tail_function(
      [tag](double p, double pc) { return family_quantile(tag, p, pc); }, 0.0,
      std::move(grid), true, tag);
}

RadialQuantile make(const FamilyTag& tag) { return make(tag, chebyshev_grid()); }

RadialQuantile pareto_tail(double alpha, std::vector<double> grid) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::domain,
          "pareto tail requires alpha in (0,2)");
  const double beta = 2.0 / alpha - 1.0;
  return RadialQuantile::from_tail_function(
      [beta](double, double pc) { return std::pow(pc, -beta); }, 0.0,
      std::move(grid), true);
}

RadialQuantile pareto_tail(double alpha) {
  return pareto_tail(alpha, chebyshev_grid());
}

}  // namespace catalog
}  // namespace rootflow
