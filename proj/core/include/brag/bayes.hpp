#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "brag/corpus.hpp"

namespace brag::bayes {

enum class PriorKind {
    Page,
    Source,
    Format,
};

const char* to_string(PriorKind kind);

/// One row of the page-tier table: pages up to and including max_page get
/// this prior. The catch-all tier uses max_page = kCatchAllPage.
inline constexpr int kCatchAllPage = std::numeric_limits<int>::max();

struct PageTier {
    int max_page = kCatchAllPage;
    double prior = 0.5;
};

/// Metadata-driven chunk priors and the inclusion threshold.
struct PriorConfig {
    std::vector<PageTier> page_tiers = {{10, 0.7}, {kCatchAllPage, 0.5}};
    std::map<std::string, double> source_reputation;
    double default_source_prior = 0.5;
    double format_bonus_prior = 0.7;
    std::set<PriorKind> enabled_priors = {PriorKind::Source};
    std::map<PriorKind, double> weights = {{PriorKind::Source, 1.0}};
    double threshold = 0.5;

    /// Throws DataError if any invariant is violated: tiers strictly
    /// increasing and ending in a catch-all, priors in [0,1], at least one
    /// prior enabled, positive weight per enabled prior, threshold in (0,1).
    void validate() const;
};

struct ScoredChunk {
    corpus::Chunk chunk;
    double likelihood = 0.0;
    double prior = 0.0;
    double posterior = 0.0;  // likelihood * prior, marginal fixed at 1
    bool included = false;   // posterior > threshold, strictly
};

/// Prior of the first tier whose max_page >= page. The default table rates
/// pages 1-10 at 0.7 and everything after at 0.5.
double page_prior(int page, const std::vector<PageTier>& tiers);

/// Reputation-map lookup, falling back to cfg.default_source_prior.
double source_prior(const std::string& source, const PriorConfig& cfg);

/// cfg.format_bonus_prior for bulleted chunks, neutral 0.5 otherwise.
double format_prior(const corpus::FormatFlags& flags, const PriorConfig& cfg);

/// Weighted geometric mean exp(sum(w_i * ln v_i) / sum(w_i)). A single value
/// returns itself; any value of exactly 0 returns 0. Missing weights count
/// as 1.
double compose_priors(const std::map<PriorKind, double>& values,
                      const std::map<PriorKind, double>& weights);

/// |Q ∩ C| / |Q| over token sets of question and chunk text; 0.5 when the
/// question has no tokens.
double lexical_likelihood(const std::string& question,
                          const std::string& chunk_text);

/// The exact product likelihood * prior; the marginal is the constant 1.
/// Throws std::invalid_argument when either input falls outside [0,1].
double posterior(double likelihood, double prior);

/// Per-chunk prior for the enabled priors in cfg, composed with cfg.weights.
double chunk_prior(const corpus::Chunk& chunk, const PriorConfig& cfg);

/// Scores each chunk with its aligned likelihood: prior from the enabled
/// prior models, posterior = likelihood * prior, included iff posterior
/// exceeds cfg.threshold strictly. Output preserves input order.
/// Throws DataError when likelihoods and chunks differ in length.
std::vector<ScoredChunk> score_chunks(const std::string& question,
                                      const std::vector<corpus::Chunk>& chunks,
                                      const std::vector<double>& likelihoods,
                                      const PriorConfig& cfg);

/// Stable partition by the included flag; both sides preserve input order.
std::pair<std::vector<ScoredChunk>, std::vector<ScoredChunk>> filter_chunks(
    const std::vector<ScoredChunk>& scored);

}  // namespace brag::bayes
