#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "brag/corpus.hpp"
#include "brag/http.hpp"

namespace brag::retrieval {

using Embedding = std::vector<double>;
using StopwordSet = std::set<std::string>;

inline constexpr int kDefaultDimension = 256;

/// Seedless, platform-independent 64-bit FNV-1a over the bytes of data.
std::uint64_t fnv1a64(std::string_view data);

/// Lowercases, splits on maximal runs of non-alphanumeric characters, drops
/// tokens shorter than 2 characters and tokens in the stopword list.
std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords = {});

/// Feature hashing: bucket = fnv1a64(token) mod d, sign from bit 63,
/// signs accumulated over the token multiset, then L2-normalized.
/// An empty token list yields the all-zero vector. Requires d >= 2.
Embedding embed(const std::vector<std::string>& tokens, int d);

double l2_norm(const Embedding& v);
double dot(const Embedding& a, const Embedding& b);

/// Batch text-to-embedding interface; lets a remote service stand in for the
/// local feature-hashing scheme behind the same contract. Implementations
/// must return unit-norm (or all-zero) vectors of their stated dimension.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual int dimension() const = 0;
    virtual std::vector<Embedding> embed_batch(
        const std::vector<std::string>& texts) const = 0;
};

class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(int dimension = kDefaultDimension,
                             StopwordSet stopwords = {});
    int dimension() const override { return dimension_; }
    std::vector<Embedding> embed_batch(
        const std::vector<std::string>& texts) const override;

private:
    int dimension_;
    StopwordSet stopwords_;
};

/// Client for a remote embedding service. POSTs {"texts": [...]} to the
/// endpoint and expects {"embeddings": [[...], ...]} with one vector of the
/// configured dimension per input text. Vectors are L2-normalized on receipt.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::string endpoint_url, int dimension,
                   int timeout_ms = 30000,
                   std::shared_ptr<http::HttpTransport> transport = nullptr);
    int dimension() const override { return dimension_; }
    std::vector<Embedding> embed_batch(
        const std::vector<std::string>& texts) const override;

private:
    std::string endpoint_;
    int dimension_;
    int timeout_ms_;
    std::shared_ptr<http::HttpTransport> transport_;
};

struct SearchHit {
    std::string chunk_id;
    double similarity = 0.0;  // in [-1, 1]
};

/// Immutable exact-scan index: one embedding per chunk plus chunk metadata.
/// Queries are embedded through the same embedder the index was built with.
/// Safe for concurrent searches once built.
class Index {
public:
    /// Embeds every chunk with embed(tokenize(chunk.text)). Throws DataError
    /// on duplicate chunk ids. Requires dimension >= 2.
    static Index build(const std::vector<corpus::Chunk>& chunks,
                       int dimension = kDefaultDimension,
                       StopwordSet stopwords = {});

    /// Same contract, arbitrary embedding backend.
    static Index build(const std::vector<corpus::Chunk>& chunks,
                       std::shared_ptr<const Embedder> embedder);

    std::size_t size() const { return chunks_.size(); }
    bool empty() const { return chunks_.empty(); }
    int dimension() const { return dimension_; }

    Embedding embed_query(const std::string& query) const;

    const corpus::Chunk* find(std::string_view chunk_id) const;
    const Embedding& embedding_of(std::string_view chunk_id) const;

    const std::vector<corpus::Chunk>& chunks() const { return chunks_; }
    const std::vector<Embedding>& embeddings() const { return embeddings_; }

private:
    Index() = default;

    int dimension_ = kDefaultDimension;
    std::shared_ptr<const Embedder> embedder_;
    std::vector<corpus::Chunk> chunks_;
    std::vector<Embedding> embeddings_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Cosine similarity between the query embedding and every chunk embedding.
/// Returns min(n, index size) hits sorted by similarity descending, ties
/// broken by chunk_id ascending. Requires n >= 1. A zero query embedding
/// yields similarity 0 for every chunk.
std::vector<SearchHit> search(const Index& index, const std::string& query,
                              int n);

}  // namespace brag::retrieval
