#include "brag/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "brag/errors.hpp"

namespace brag::retrieval {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (current.size() >= 2 && !stopwords.count(current)) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

Embedding embed(const std::vector<std::string>& tokens, int d) {
    if (d < 2) throw DataError("embedding dimension must be >= 2");
    Embedding v(static_cast<std::size_t>(d), 0.0);
    for (const auto& token : tokens) {
        const std::uint64_t h = fnv1a64(token);
        const auto bucket =
            static_cast<std::size_t>(h % static_cast<std::uint64_t>(d));
        v[bucket] += (h & (1ull << 63)) ? -1.0 : 1.0;
    }
    const double norm = l2_norm(v);
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

double l2_norm(const Embedding& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

double dot(const Embedding& a, const Embedding& b) {
    double sum = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

HashingEmbedder::HashingEmbedder(int dimension, StopwordSet stopwords)
    : dimension_(dimension), stopwords_(std::move(stopwords)) {
    if (dimension_ < 2) throw DataError("embedding dimension must be >= 2");
}

std::vector<Embedding> HashingEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        out.push_back(embed(tokenize(text, stopwords_), dimension_));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint_url, int dimension,
                               int timeout_ms,
                               std::shared_ptr<http::HttpTransport> transport)
    : endpoint_(std::move(endpoint_url)),
      dimension_(dimension),
      timeout_ms_(timeout_ms),
      transport_(transport ? std::move(transport)
                           : http::make_httplib_transport()) {
    if (dimension_ < 2) throw DataError("embedding dimension must be >= 2");
}

std::vector<Embedding> RemoteEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
    nlohmann::json request;
    request["texts"] = texts;

    const auto response = transport_->post_json(
        endpoint_, {{"Content-Type", "application/json"}}, request.dump(),
        timeout_ms_);
    if (response.transport_failed) {
        throw TransportError("embedding service unreachable: " +
                             response.transport_error);
    }
    if (response.status != 200) {
        throw TransportError("embedding service returned status " +
                             std::to_string(response.status));
    }

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed embedding response: ") + e.what());
    }
    if (!body.contains("embeddings") || !body["embeddings"].is_array() ||
        body["embeddings"].size() != texts.size()) {
        throw DataError("embedding response must carry one vector per text");
    }

    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& row : body["embeddings"]) {
        if (!row.is_array() || static_cast<int>(row.size()) != dimension_) {
            throw DataError("embedding vector has wrong dimension");
        }
        Embedding v = row.get<Embedding>();
        const double norm = l2_norm(v);
        if (norm > 0.0) {
            for (double& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

Index Index::build(const std::vector<corpus::Chunk>& chunks, int dimension,
                   StopwordSet stopwords) {
    return build(chunks, std::make_shared<HashingEmbedder>(
                             dimension, std::move(stopwords)));
}

Index Index::build(const std::vector<corpus::Chunk>& chunks,
                   std::shared_ptr<const Embedder> embedder) {
    Index index;
    index.dimension_ = embedder->dimension();
    index.embedder_ = std::move(embedder);
    index.chunks_ = chunks;
    index.by_id_.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (!index.by_id_.emplace(chunks[i].chunk_id, i).second) {
            throw DataError("duplicate chunk_id: " + chunks[i].chunk_id);
        }
    }
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    index.embeddings_ = index.embedder_->embed_batch(texts);
    return index;
}

Embedding Index::embed_query(const std::string& query) const {
    if (!embedder_) return Embedding(static_cast<std::size_t>(dimension_), 0.0);
    return embedder_->embed_batch({query}).front();
}

const corpus::Chunk* Index::find(std::string_view chunk_id) const {
    const auto it = by_id_.find(std::string(chunk_id));
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const Embedding& Index::embedding_of(std::string_view chunk_id) const {
    const auto it = by_id_.find(std::string(chunk_id));
    if (it == by_id_.end()) {
        throw DataError("unknown chunk_id: " + std::string(chunk_id));
    }
    return embeddings_[it->second];
}

std::vector<SearchHit> search(const Index& index, const std::string& query,
                              int n) {
    if (n < 1) throw DataError("search n must be >= 1");
    if (index.empty()) return {};

    const Embedding q = index.embed_query(query);
    const bool zero_query = l2_norm(q) == 0.0;

    std::vector<SearchHit> hits;
    hits.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        double sim = 0.0;
        if (!zero_query) {
            // Embeddings are unit-norm or zero, so the dot product is the
            // cosine; clamp fp spill so similarity stays in [-1, 1].
            sim = std::clamp(dot(q, index.embeddings()[i]), -1.0, 1.0);
        }
        hits.push_back({index.chunks()[i].chunk_id, sim});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.chunk_id < b.chunk_id;
    });
    if (hits.size() > static_cast<std::size_t>(n)) {
        hits.resize(static_cast<std::size_t>(n));
    }
    return hits;
}

}  // namespace brag::retrieval
