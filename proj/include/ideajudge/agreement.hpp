#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace ideajudge {

enum class DistanceMetric { nominal, ordinal, interval };

std::string_view to_string(DistanceMetric m);
DistanceMetric parse_metric(std::string_view s);

/// Units x raters table of integer ratings with missing cells.
class RatingMatrix {
 public:
  RatingMatrix(std::vector<std::string> units, std::vector<std::string> raters,
               std::vector<int> value_domain);

  /// Builds a matrix from (unit, rater, value) triples. Units and raters are
  /// taken in sorted order.
  static RatingMatrix from_triples(
      std::span<const std::tuple<std::string, std::string, int>> triples,
      std::vector<int> value_domain);

  const std::vector<std::string>& units() const { return units_; }
  const std::vector<std::string>& raters() const { return raters_; }
  const std::vector<int>& value_domain() const { return value_domain_; }

  /// Throws RangeError when `value` is not in the value domain.
  void set(std::size_t unit, std::size_t rater, int value);
  void clear(std::size_t unit, std::size_t rater);
  std::optional<int> at(std::size_t unit, std::size_t rater) const;
  std::size_t filled() const;

 private:
  std::vector<std::string> units_;
  std::vector<std::string> raters_;
  std::vector<int> value_domain_;
  std::vector<std::optional<int>> cells_;
};

struct AgreementReport {
  /// Empty when expected disagreement is zero (alpha undefined).
  std::optional<double> alpha;
  std::size_t n_units_used = 0;
  std::size_t n_pairable_values = 0;
  DistanceMetric metric = DistanceMetric::ordinal;

  bool undefined() const { return !alpha.has_value(); }
};

/// Krippendorff's alpha via the coincidence matrix. Units with fewer than two
/// ratings are dropped. Throws InsufficientDataError when no unit is pairable.
AgreementReport krippendorff_alpha(const RatingMatrix& matrix,
                                   DistanceMetric metric = DistanceMetric::ordinal);

/// Squared distance between domain entries `c` and `k` (indices into the value
/// domain) given value frequencies `n` over the same domain.
double squared_distance(DistanceMetric metric, std::span<const int> value_domain,
                        std::span<const double> n, std::size_t c, std::size_t k);

enum class MedianRule { strict, inclusive };

/// Items whose score is above the owner's median (strict: ties excluded).
std::set<std::string> above_median_set(const std::map<std::string, int>& scores,
                                       MedianRule rule = MedianRule::strict);

double median(std::vector<double> values);

/// Jaccard index; two empty sets count as identical (1.0).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct OwnerSelection {
  std::string owner;
  std::set<std::string> selected;
  std::set<std::string> scored;
};

struct PairJaccard {
  std::string a;
  std::string b;
  std::size_t shared = 0;
  bool qualifies = false;
  double jaccard = 0.0;  // meaningful only when `qualifies`
};

struct PairwiseJaccardResult {
  /// Empty when no pair met the overlap rule.
  std::optional<double> mean;
  std::vector<PairJaccard> pairs;

  std::size_t qualifying() const;
};

inline constexpr std::size_t kDefaultMinOverlap = 10;

/// Mean Jaccard over owner pairs sharing at least `min_overlap` scored items.
/// Selections are restricted to the pair's shared scored items first.
PairwiseJaccardResult pairwise_jaccard(std::span<const OwnerSelection> owners,
                                       std::size_t min_overlap = kDefaultMinOverlap);

/// Fraction of the reference's top ceil(n/2) items (over shared items) that
/// the candidate also ranks in its top ceil(n/2). Ranking: score descending,
/// then item id ascending. Throws DegenerateInputError under two shared items.
double top_half_overlap(const std::map<std::string, int>& reference,
                        const std::map<std::string, int>& candidate);

/// Sample Pearson correlation. Throws DegenerateInputError on length mismatch,
/// fewer than two points or a zero-variance series.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

/// Throws DegenerateInputError on dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace ideajudge
