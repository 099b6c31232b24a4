#include "brag/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "brag/errors.hpp"
#include "brag/retrieval.hpp"

namespace brag::bayes {

const char* to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::Page: return "page";
        case PriorKind::Source: return "source";
        case PriorKind::Format: return "format";
    }
    return "?";
}

namespace {

void check_unit_interval(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DataError(std::string(what) + " must be in [0,1]");
    }
}

}  // namespace

void PriorConfig::validate() const {
    if (page_tiers.empty()) throw DataError("page_tiers must not be empty");
    for (std::size_t i = 0; i < page_tiers.size(); ++i) {
        const auto& tier = page_tiers[i];
        if (tier.max_page < 1) throw DataError("page tier max_page must be >= 1");
        check_unit_interval(tier.prior, "page tier prior");
        if (i > 0 && tier.max_page <= page_tiers[i - 1].max_page) {
            throw DataError("page_tiers max_page must be strictly increasing");
        }
    }
    if (page_tiers.back().max_page != kCatchAllPage) {
        throw DataError("page_tiers must end with a catch-all tier");
    }
    for (const auto& [source, prior] : source_reputation) {
        check_unit_interval(prior, ("source prior for '" + source + "'").c_str());
    }
    check_unit_interval(default_source_prior, "default_source_prior");
    check_unit_interval(format_bonus_prior, "format_bonus_prior");
    if (enabled_priors.empty()) {
        throw DataError("at least one prior must be enabled");
    }
    for (const auto kind : enabled_priors) {
        const auto it = weights.find(kind);
        if (it != weights.end() && !(it->second > 0.0)) {
            throw DataError(std::string("weight for ") + to_string(kind) +
                            " prior must be > 0");
        }
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DataError("threshold must be in (0,1)");
    }
}

double page_prior(int page, const std::vector<PageTier>& tiers) {
    for (const auto& tier : tiers) {
        if (tier.max_page >= page) return tier.prior;
    }
    return tiers.empty() ? 0.5 : tiers.back().prior;
}

double source_prior(const std::string& source, const PriorConfig& cfg) {
    const auto it = cfg.source_reputation.find(source);
    return it == cfg.source_reputation.end() ? cfg.default_source_prior
                                             : it->second;
}

double format_prior(const corpus::FormatFlags& flags, const PriorConfig& cfg) {
    return flags.count(corpus::FormatFlag::Bulleted) ? cfg.format_bonus_prior
                                                     : 0.5;
}

double compose_priors(const std::map<PriorKind, double>& values,
                      const std::map<PriorKind, double>& weights) {
    if (values.empty()) throw DataError("compose_priors needs at least one value");
    if (values.size() == 1) return values.begin()->second;

    double weighted_log_sum = 0.0;
    double weight_sum = 0.0;
    for (const auto& [kind, value] : values) {
        if (value == 0.0) return 0.0;
        const auto it = weights.find(kind);
        const double w = it == weights.end() ? 1.0 : it->second;
        weighted_log_sum += w * std::log(value);
        weight_sum += w;
    }
    return std::exp(weighted_log_sum / weight_sum);
}

double lexical_likelihood(const std::string& question,
                          const std::string& chunk_text) {
    const auto q_tokens = retrieval::tokenize(question);
    if (q_tokens.empty()) return 0.5;
    const std::unordered_set<std::string> q_set(q_tokens.begin(), q_tokens.end());
    const auto c_tokens = retrieval::tokenize(chunk_text);
    const std::unordered_set<std::string> c_set(c_tokens.begin(), c_tokens.end());
    std::size_t covered = 0;
    for (const auto& t : q_set) covered += c_set.count(t);
    return static_cast<double>(covered) / static_cast<double>(q_set.size());
}

double posterior(double likelihood, double prior) {
    if (!(likelihood >= 0.0 && likelihood <= 1.0)) {
        throw std::invalid_argument("likelihood must be in [0,1]");
    }
    if (!(prior >= 0.0 && prior <= 1.0)) {
        throw std::invalid_argument("prior must be in [0,1]");
    }
    return likelihood * prior;
}

double chunk_prior(const corpus::Chunk& chunk, const PriorConfig& cfg) {
    std::map<PriorKind, double> values;
    for (const auto kind : cfg.enabled_priors) {
        switch (kind) {
            case PriorKind::Page:
                values[kind] = page_prior(chunk.page, cfg.page_tiers);
                break;
            case PriorKind::Source:
                values[kind] = source_prior(chunk.source, cfg);
                break;
            case PriorKind::Format:
                values[kind] = format_prior(chunk.format_flags, cfg);
                break;
        }
    }
    return compose_priors(values, cfg.weights);
}

std::vector<ScoredChunk> score_chunks(const std::string& question,
                                      const std::vector<corpus::Chunk>& chunks,
                                      const std::vector<double>& likelihoods,
                                      const PriorConfig& cfg) {
    (void)question;  // likelihoods arrive pre-estimated and aligned
    if (chunks.size() != likelihoods.size()) {
        throw DataError("likelihoods must align 1:1 with chunks (" +
                        std::to_string(likelihoods.size()) + " vs " +
                        std::to_string(chunks.size()) + ")");
    }
    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        ScoredChunk s;
        s.chunk = chunks[i];
        s.likelihood = likelihoods[i];
        s.prior = chunk_prior(chunks[i], cfg);
        s.posterior = posterior(s.likelihood, s.prior);
        s.included = s.posterior > cfg.threshold;
        scored.push_back(std::move(s));
    }
    return scored;
}

std::pair<std::vector<ScoredChunk>, std::vector<ScoredChunk>> filter_chunks(
    const std::vector<ScoredChunk>& scored) {
    std::pair<std::vector<ScoredChunk>, std::vector<ScoredChunk>> out;
    for (const auto& s : scored) {
        (s.included ? out.first : out.second).push_back(s);
    }
    return out;
}

}  // namespace brag::bayes
