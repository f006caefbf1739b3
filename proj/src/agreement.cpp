#include "ideajudge/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ideajudge/errors.hpp"

namespace ideajudge {

std::string_view to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::nominal:
      return "nominal";
    case DistanceMetric::ordinal:
      return "ordinal";
    case DistanceMetric::interval:
      return "interval";
  }
  return "?";
}

DistanceMetric parse_metric(std::string_view s) {
  if (s == "nominal") return DistanceMetric::nominal;
  if (s == "ordinal") return DistanceMetric::ordinal;
  if (s == "interval") return DistanceMetric::interval;
  throw ConfigError("unknown distance metric '" + std::string(s) + "'");
}

RatingMatrix::RatingMatrix(std::vector<std::string> units, std::vector<std::string> raters,
                           std::vector<int> value_domain)
    : units_(std::move(units)),
      raters_(std::move(raters)),
      value_domain_(std::move(value_domain)),
      cells_(units_.size() * raters_.size()) {
  std::sort(value_domain_.begin(), value_domain_.end());
  value_domain_.erase(std::unique(value_domain_.begin(), value_domain_.end()),
                      value_domain_.end());
}

RatingMatrix RatingMatrix::from_triples(
    std::span<const std::tuple<std::string, std::string, int>> triples,
    std::vector<int> value_domain) {
  std::set<std::string> unit_set, rater_set;
  for (const auto& [u, r, v] : triples) {
    unit_set.insert(u);
    rater_set.insert(r);
  }
  std::vector<std::string> units(unit_set.begin(), unit_set.end());
  std::vector<std::string> raters(rater_set.begin(), rater_set.end());
  RatingMatrix m(units, raters, std::move(value_domain));
  for (const auto& [u, r, v] : triples) {
    auto ui = std::lower_bound(units.begin(), units.end(), u) - units.begin();
    auto ri = std::lower_bound(raters.begin(), raters.end(), r) - raters.begin();
    m.set(static_cast<std::size_t>(ui), static_cast<std::size_t>(ri), v);
  }
  return m;
}

void RatingMatrix::set(std::size_t unit, std::size_t rater, int value) {
  if (!std::binary_search(value_domain_.begin(), value_domain_.end(), value)) {
    throw RangeError("rating " + std::to_string(value) + " is not in the value domain");
  }
  cells_.at(unit * raters_.size() + rater) = value;
}

void RatingMatrix::clear(std::size_t unit, std::size_t rater) {
  cells_.at(unit * raters_.size() + rater).reset();
}

std::optional<int> RatingMatrix::at(std::size_t unit, std::size_t rater) const {
  return cells_.at(unit * raters_.size() + rater);
}

std::size_t RatingMatrix::filled() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); }));
}

double squared_distance(DistanceMetric metric, std::span<const int> value_domain,
                        std::span<const double> n, std::size_t c, std::size_t k) {
  if (c == k) return 0.0;
  switch (metric) {
    case DistanceMetric::nominal:
      return 1.0;
    case DistanceMetric::interval: {
      double d = static_cast<double>(value_domain[c]) - value_domain[k];
      return d * d;
    }
    case DistanceMetric::ordinal: {
      auto [lo, hi] = std::minmax(c, k);
      double s = 0.0;
      for (std::size_t g = lo; g <= hi; ++g) s += n[g];
      s -= (n[lo] + n[hi]) / 2.0;
      return s * s;
    }
  }
  return 0.0;
}

AgreementReport krippendorff_alpha(const RatingMatrix& matrix, DistanceMetric metric) {
  const auto& domain = matrix.value_domain();
  const std::size_t v = domain.size();
  auto index_of = [&](int value) {
    return static_cast<std::size_t>(std::lower_bound(domain.begin(), domain.end(), value) -
                                    domain.begin());
  };

  // o[c][k]: coincidences of value c with value k, each unit weighted 1/(m_u - 1).
  std::vector<double> o(v * v, 0.0);
  AgreementReport report;
  report.metric = metric;
  std::vector<std::size_t> counts(v);
  for (std::size_t u = 0; u < matrix.units().size(); ++u) {
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t m = 0;
    for (std::size_t r = 0; r < matrix.raters().size(); ++r) {
      if (auto cell = matrix.at(u, r)) {
        ++counts[index_of(*cell)];
        ++m;
      }
    }
    if (m < 2) continue;
    ++report.n_units_used;
    report.n_pairable_values += m;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < v; ++c) {
      if (!counts[c]) continue;
      for (std::size_t k = 0; k < v; ++k) {
        if (!counts[k]) continue;
        double pairs = c == k ? static_cast<double>(counts[c]) * (counts[c] - 1)
                              : static_cast<double>(counts[c]) * counts[k];
        o[c * v + k] += pairs * w;
      }
    }
  }
  if (report.n_units_used == 0) {
    throw InsufficientDataError("insufficient pairable data: no unit has two or more ratings");
  }

  std::vector<double> n_c(v, 0.0);
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) n_c[c] += o[c * v + k];
  }
  const double n = std::accumulate(n_c.begin(), n_c.end(), 0.0);

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) {
      if (c == k) continue;
      double d2 = squared_distance(metric, domain, n_c, c, k);
      observed += o[c * v + k] * d2;
      expected += n_c[c] * n_c[k] * d2;
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);

  if (expected <= 0.0) return report;
  report.alpha = 1.0 - observed / expected;
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DegenerateInputError("median of an empty set");
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

std::set<std::string> above_median_set(const std::map<std::string, int>& scores,
                                       MedianRule rule) {
  std::set<std::string> out;
  if (scores.empty()) return out;
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& [item, s] : scores) values.push_back(s);
  const double med = median(std::move(values));
  for (const auto& [item, s] : scores) {
    if (s > med || (rule == MedianRule::inclusive && s == med)) out.insert(item);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.contains(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::size_t PairwiseJaccardResult::qualifying() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.qualifies; }));
}

namespace {

std::set<std::string> restrict_to(const std::set<std::string>& s,
                                  const std::set<std::string>& allowed) {
  std::set<std::string> out;
  for (const auto& x : s) {
    if (allowed.contains(x)) out.insert(x);
  }
  return out;
}

}  // namespace

PairwiseJaccardResult pairwise_jaccard(std::span<const OwnerSelection> owners,
                                       std::size_t min_overlap) {
  PairwiseJaccardResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < owners.size(); ++i) {
    for (std::size_t j = i + 1; j < owners.size(); ++j) {
      const auto& a = owners[i];
      const auto& b = owners[j];
      PairJaccard pair{a.owner, b.owner};
      std::set<std::string> shared = restrict_to(a.scored, b.scored);
      pair.shared = shared.size();
      pair.qualifies = pair.shared >= min_overlap && pair.shared > 0;
      if (pair.qualifies) {
        pair.jaccard = jaccard(restrict_to(a.selected, shared), restrict_to(b.selected, shared));
        sum += pair.jaccard;
      }
      result.pairs.push_back(std::move(pair));
    }
  }
  if (std::size_t q = result.qualifying()) result.mean = sum / static_cast<double>(q);
  return result;
}

namespace {

std::set<std::string> top_half(const std::map<std::string, int>& scores,
                               const std::vector<std::string>& shared) {
  std::vector<std::string> ranked = shared;
  // `shared` is sorted by id, so a stable sort on score alone keeps ids ascending.
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return scores.at(a) > scores.at(b);
  });
  ranked.resize((ranked.size() + 1) / 2);
  return {ranked.begin(), ranked.end()};
}

}  // namespace

double top_half_overlap(const std::map<std::string, int>& reference,
                        const std::map<std::string, int>& candidate) {
  std::vector<std::string> shared;
  for (const auto& [item, s] : reference) {
    if (candidate.contains(item)) shared.push_back(item);
  }
  if (shared.size() < 2) {
    throw DegenerateInputError("top-half overlap needs at least 2 shared items, got " +
                               std::to_string(shared.size()));
  }
  auto ref_top = top_half(reference, shared);
  auto cand_top = top_half(candidate, shared);
  std::size_t inter = 0;
  for (const auto& x : ref_top) inter += cand_top.contains(x);
  return static_cast<double>(inter) / static_cast<double>(ref_top.size());
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DegenerateInputError("pearson_r: length mismatch");
  if (xs.size() < 2) throw DegenerateInputError("pearson_r: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("degenerate series: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DegenerateInputError("cosine_similarity: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace ideajudge
