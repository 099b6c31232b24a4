#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace brag::corpus {

enum class FormatFlag {
    Bulleted,
};

using FormatFlags = std::set<FormatFlag>;

/// One page of a document. Multiple corpus records landing on the same page
/// are joined with a blank line, preserving record order.
struct Page {
    int number = 1;
    std::string text;
};

struct Document {
    std::string doc_id;
    std::string source;
    std::vector<Page> pages;  // page numbers strictly increasing
};

/// A contiguous span of page text carrying provenance metadata.
struct Chunk {
    std::string chunk_id;  // doc_id + ":" + page + ":" + index
    std::string doc_id;
    std::string source;
    int page = 1;
    int index = 0;  // position within the page, from 0
    std::string text;
    FormatFlags format_flags;
};

/// Builds the canonical chunk id from its parts.
std::string make_chunk_id(const std::string& doc_id, int page, int index);

/// Constructs a chunk, deriving chunk_id and format flags from the parts.
/// Throws DataError if text trims to empty or page < 1.
Chunk make_chunk(const std::string& doc_id, const std::string& source, int page,
                 int index, std::string text);

/// Loads a JSON Lines corpus file. One record per paragraph-or-page unit with
/// fields doc_id, source, page, text and an optional index. Records are
/// grouped into documents by doc_id; pages are ordered and same-page records
/// are joined in file order.
///
/// Throws DataError on I/O failure, malformed lines (reported with the line
/// number) or duplicate (doc_id, page, index) triples.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Loads a chunk file: same JSONL schema as the corpus, each record becoming
/// one chunk as-is, plus an optional likelihood field in [0,1].
struct ChunkRecord {
    Chunk chunk;
    std::optional<double> likelihood;
};
std::vector<ChunkRecord> load_chunk_file(const std::filesystem::path& path);

/// Splits each page of a document into chunks. Paragraphs are separated by
/// blank lines; paragraphs longer than max_chars are split at the last
/// sentence boundary before the limit, falling back to a hard split at
/// max_chars. Chunk indices count from 0 within each page.
///
/// Requires max_chars >= 64.
std::vector<Chunk> chunk_document(const Document& doc, int max_chars = 1200);

/// Returns {Bulleted} iff at least two lines of the text start (after leading
/// whitespace) with "-", "*", "•" or digits followed by ".".
FormatFlags detect_format(const std::string& text);

}  // namespace brag::corpus
