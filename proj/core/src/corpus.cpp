#include "brag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "brag/errors.hpp"

namespace brag::corpus {

namespace {

std::string_view trim_view(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool is_blank(std::string_view line) { return trim_view(line).empty(); }

/// Splits page text into trimmed paragraphs separated by blank lines.
std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> paragraphs;
    std::string current;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line =
            std::string_view(text).substr(pos, nl == std::string::npos
                                                   ? std::string::npos
                                                   : nl - pos);
        if (is_blank(line)) {
            if (!current.empty()) {
                paragraphs.emplace_back(trim_view(current));
                current.clear();
            }
        } else {
            if (!current.empty()) current += '\n';
            current += line;
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    if (!current.empty()) paragraphs.emplace_back(trim_view(current));
    return paragraphs;
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

/// Splits an over-long paragraph. Pieces keep their exact bytes so that the
/// concatenation recovers the paragraph.
std::vector<std::string> split_overlong(std::string_view para,
                                        std::size_t max_chars) {
    std::vector<std::string> pieces;
    while (para.size() > max_chars) {
        std::size_t cut = max_chars;  // hard-split fallback
        for (std::size_t i = max_chars; i-- > 0;) {
            if (is_sentence_end(para[i])) {
                cut = i + 1;
                break;
            }
        }
        pieces.emplace_back(para.substr(0, cut));
        para.remove_prefix(cut);
    }
    if (!para.empty()) pieces.emplace_back(para);

    // Fold whitespace-only pieces into a neighbor; every emitted chunk must
    // trim non-empty and no byte may be lost.
    std::vector<std::string> merged;
    std::string carry;
    for (auto& piece : pieces) {
        if (trim_view(piece).empty()) {
            if (!merged.empty()) {
                merged.back() += piece;
            } else {
                carry += piece;
            }
        } else {
            merged.push_back(carry + piece);
            carry.clear();
        }
    }
    return merged;
}

struct RawRecord {
    std::string doc_id;
    std::string source;
    int page = 1;
    std::optional<int> index;
    std::string text;
    std::optional<double> likelihood;
};

RawRecord parse_record(const std::string& line, int line_no) {
    const auto fail = [line_no](const std::string& why) -> RawRecord {
        throw DataError("line " + std::to_string(line_no) + ": " + why);
    };

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        return fail(std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) return fail("record must be a JSON object");

    RawRecord rec;
    if (!j.contains("doc_id") || !j["doc_id"].is_string())
        return fail("missing or non-string field 'doc_id'");
    rec.doc_id = j["doc_id"].get<std::string>();
    if (rec.doc_id.empty()) return fail("doc_id must be non-empty");

    if (!j.contains("source") || !j["source"].is_string())
        return fail("missing or non-string field 'source'");
    rec.source = j["source"].get<std::string>();

    if (!j.contains("page") || !j["page"].is_number_integer())
        return fail("missing or non-integer field 'page'");
    rec.page = j["page"].get<int>();
    if (rec.page < 1) return fail("page must be >= 1");

    if (!j.contains("text") || !j["text"].is_string())
        return fail("missing or non-string field 'text'");
    rec.text = j["text"].get<std::string>();

    if (j.contains("index")) {
        if (!j["index"].is_number_integer() || j["index"].get<int>() < 0)
            return fail("index must be a non-negative integer");
        rec.index = j["index"].get<int>();
    }
    if (j.contains("likelihood")) {
        if (!j["likelihood"].is_number())
            return fail("likelihood must be a number");
        rec.likelihood = j["likelihood"].get<double>();
        if (*rec.likelihood < 0.0 || *rec.likelihood > 1.0)
            return fail("likelihood must be in [0,1]");
    }
    return rec;
}

/// Streams the non-blank lines of a JSONL file through a callback.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        fn(parse_record(line, line_no), line_no);
    }
    if (in.bad()) throw DataError("I/O failure reading " + path.string());
}

using PageKey = std::pair<std::string, int>;

/// Tracks per-(doc, page) auto indices and rejects duplicate triples.
class IndexTracker {
public:
    int assign(const RawRecord& rec, int line_no) {
        const PageKey key{rec.doc_id, rec.page};
        int& counter = next_auto_[key];
        const int index = rec.index.value_or(counter);
        ++counter;
        if (!used_[key].insert(index).second) {
            throw DataError("line " + std::to_string(line_no) +
                            ": duplicate record (" + rec.doc_id + ", page " +
                            std::to_string(rec.page) + ", index " +
                            std::to_string(index) + ")");
        }
        return index;
    }

private:
    std::map<PageKey, int> next_auto_;
    std::map<PageKey, std::set<int>> used_;
};

}  // namespace

std::string make_chunk_id(const std::string& doc_id, int page, int index) {
    return doc_id + ":" + std::to_string(page) + ":" + std::to_string(index);
}

Chunk make_chunk(const std::string& doc_id, const std::string& source, int page,
                 int index, std::string text) {
    if (doc_id.empty()) throw DataError("doc_id must be non-empty");
    if (page < 1) throw DataError("page must be >= 1");
    if (index < 0) throw DataError("chunk index must be >= 0");
    if (trim_view(text).empty())
        throw DataError("chunk text must be non-empty after trimming");
    Chunk chunk;
    chunk.chunk_id = make_chunk_id(doc_id, page, index);
    chunk.doc_id = doc_id;
    chunk.source = source;
    chunk.page = page;
    chunk.index = index;
    chunk.format_flags = detect_format(text);
    chunk.text = std::move(text);
    return chunk;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::vector<Document> docs;
    std::map<std::string, std::size_t> doc_pos;
    std::map<PageKey, std::vector<std::string>> page_texts;
    IndexTracker indices;

    for_each_record(path, [&](const RawRecord& rec, int line_no) {
        indices.assign(rec, line_no);
        auto [it, inserted] = doc_pos.try_emplace(rec.doc_id, docs.size());
        if (inserted) {
            docs.push_back(Document{rec.doc_id, rec.source, {}});
        } else if (docs[it->second].source != rec.source) {
            throw DataError("line " + std::to_string(line_no) +
                            ": conflicting source for doc '" + rec.doc_id +
                            "': '" + docs[it->second].source + "' vs '" +
                            rec.source + "'");
        }
        page_texts[{rec.doc_id, rec.page}].push_back(rec.text);
    });

    for (auto& doc : docs) {
        const auto begin = page_texts.lower_bound({doc.doc_id, 0});
        const auto end =
            page_texts.upper_bound({doc.doc_id, std::numeric_limits<int>::max()});
        for (auto it = begin; it != end; ++it) {
            Page page;
            page.number = it->first.second;
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                if (i) page.text += "\n\n";
                page.text += it->second[i];
            }
            doc.pages.push_back(std::move(page));
        }
    }
    return docs;
}

std::vector<ChunkRecord> load_chunk_file(const std::filesystem::path& path) {
    std::vector<ChunkRecord> records;
    IndexTracker indices;
    for_each_record(path, [&](const RawRecord& rec, int line_no) {
        const int index = indices.assign(rec, line_no);
        try {
            records.push_back(ChunkRecord{
                make_chunk(rec.doc_id, rec.source, rec.page, index, rec.text),
                rec.likelihood});
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    });
    return records;
}

std::vector<Chunk> chunk_document(const Document& doc, int max_chars) {
    if (max_chars < 64) throw DataError("max_chars must be >= 64");
    std::vector<Chunk> chunks;
    for (const auto& page : doc.pages) {
        int index = 0;
        for (const auto& paragraph : split_paragraphs(page.text)) {
            for (auto& piece :
                 split_overlong(paragraph, static_cast<std::size_t>(max_chars))) {
                chunks.push_back(make_chunk(doc.doc_id, doc.source, page.number,
                                            index++, std::move(piece)));
            }
        }
    }
    return chunks;
}

FormatFlags detect_format(const std::string& text) {
    constexpr std::string_view kBullet = "•";
    int marker_lines = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = std::string_view(text).substr(
            pos, nl == std::string::npos ? std::string::npos : nl - pos);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        bool marker = false;
        if (!line.empty()) {
            if (line.front() == '-' || line.front() == '*' ||
                line.substr(0, kBullet.size()) == kBullet) {
                marker = true;
            } else if (std::isdigit(static_cast<unsigned char>(line.front()))) {
                std::size_t digits = 0;
                while (digits < line.size() &&
                       std::isdigit(static_cast<unsigned char>(line[digits])))
                    ++digits;
                marker = digits < line.size() && line[digits] == '.';
            }
        }
        if (marker) ++marker_lines;
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return marker_lines >= 2 ? FormatFlags{FormatFlag::Bulleted} : FormatFlags{};
}

}  // namespace brag::corpus
