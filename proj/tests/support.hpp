#pragma once

// Independent reference implementations and small corpus builders shared by
// the unit tests and the acceptance gate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ideajudge/agreement.hpp"
#include "ideajudge/corpus.hpp"

namespace testsupport {

using Grid = std::vector<std::vector<std::optional<int>>>;  // units x raters

// Alpha by direct enumeration of value pairs: within-unit ordered pairs for
// observed disagreement, all ordered pairs of pairable values for expected.
inline std::optional<double> brute_alpha(const Grid& grid, const std::vector<int>& domain,
                                         ideajudge::DistanceMetric metric) {
  std::vector<std::vector<int>> units;
  for (const auto& row : grid) {
    std::vector<int> vals;
    for (const auto& c : row) {
      if (c) vals.push_back(*c);
    }
    if (vals.size() >= 2) units.push_back(vals);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  const double n = static_cast<double>(all.size());
  std::map<int, double> freq;
  for (int v : all) freq[v] += 1.0;

  auto delta2 = [&](int a, int b) -> double {
    switch (metric) {
      case ideajudge::DistanceMetric::nominal:
        return a == b ? 0.0 : 1.0;
      case ideajudge::DistanceMetric::interval:
        return static_cast<double>(a - b) * static_cast<double>(a - b);
      case ideajudge::DistanceMetric::ordinal: {
        int lo = std::min(a, b);
        int hi = std::max(a, b);
        double s = 0.0;
        for (int g : domain) {
          if (g >= lo && g <= hi) s += freq[g];
        }
        s -= (freq[lo] + freq[hi]) / 2.0;
        return s * s;
      }
    }
    return 0.0;
  };

  double d_o = 0.0;
  for (const auto& u : units) {
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) sum += delta2(u[i], u[j]);
      }
    }
    d_o += sum / static_cast<double>(u.size() - 1);
  }
  d_o /= n;

  double d_e = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j) d_e += delta2(all[i], all[j]);
    }
  }
  d_e /= n * (n - 1.0);
  if (d_e == 0.0) return std::nullopt;
  return 1.0 - d_o / d_e;
}

inline ideajudge::RatingMatrix to_matrix(const Grid& grid, const std::vector<int>& domain) {
  std::vector<std::string> units;
  std::vector<std::string> raters;
  for (std::size_t u = 0; u < grid.size(); ++u) units.push_back("u" + std::to_string(u));
  std::size_t n_raters = grid.empty() ? 0 : grid.front().size();
  for (std::size_t r = 0; r < n_raters; ++r) raters.push_back("r" + std::to_string(r));
  ideajudge::RatingMatrix m(units, raters, domain);
  for (std::size_t u = 0; u < grid.size(); ++u) {
    for (std::size_t r = 0; r < n_raters; ++r) {
      if (grid[u][r]) m.set(u, r, *grid[u][r]);
    }
  }
  return m;
}

/// Random grid with the given shape; each cell missing with `p_missing`.
inline Grid random_grid(std::mt19937_64& rng, std::size_t units, std::size_t raters, int lo,
                        int hi, double p_missing) {
  std::uniform_int_distribution<int> value(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Grid g(units, std::vector<std::optional<int>>(raters));
  for (auto& row : g) {
    for (auto& c : row) {
      if (coin(rng) >= p_missing) c = value(rng);
    }
  }
  return g;
}

inline double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

inline double brute_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(dot / std::sqrt(nu * nv));
}

/// The vote rule spelled out: collect every value reaching the top count,
/// then take the lower middle one.
inline int oracle_vote(const std::vector<int>& scores) {
  std::map<int, int> count;
  for (int s : scores) ++count[s];
  int best = 0;
  for (const auto& [_, c] : count) best = std::max(best, c);
  std::vector<int> modes;
  for (const auto& [v, c] : count) {
    if (c == best) modes.push_back(v);
  }
  return modes[(modes.size() - 1) / 2];
}

// --- corpus builders --------------------------------------------------------

inline ideajudge::Patent patent(const std::string& id,
                                ideajudge::Domain domain = ideajudge::Domain::nlp) {
  return {id, domain, "Title of " + id, "Abstract of " + id, {"Claim one of " + id}, ""};
}

inline ideajudge::Idea idea(const std::string& id, const std::string& patent_id,
                            const std::string& text = "") {
  std::string body = text.empty() ? "idea " + id : text;
  return {id, patent_id, "sys", body, body, body, body};
}

inline ideajudge::Evaluator evaluator(const std::string& id,
                                      ideajudge::Domain domain = ideajudge::Domain::nlp) {
  return {id, domain, ideajudge::Background::technical};
}

inline ideajudge::ScoreRecord score(const std::string& e, const std::string& i,
                                    ideajudge::Dimension d, int s) {
  return {e, i, d, s, std::nullopt};
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ideajudge_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
