#include "brag/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "brag/errors.hpp"

namespace brag::config {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& source, int line_no,
                       const std::string& why) {
    throw DataError(source + " line " + std::to_string(line_no) + ": " + why);
}

/// Splits "prior.source_reputation.\"Times of India\"" into its segments.
std::vector<std::string> parse_key(const std::string& source, int line_no,
                                   const std::string& raw) {
    std::vector<std::string> segments;
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '"') {
            in_quotes = !in_quotes;
        } else if (c == '.' && !in_quotes) {
            if (current.empty()) fail(source, line_no, "empty key segment");
            segments.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (in_quotes) fail(source, line_no, "unterminated quote in key");
    if (current.empty()) fail(source, line_no, "empty key segment");
    segments.push_back(current);
    return segments;
}

std::string unquote(const std::string& value) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

int parse_int(const std::string& source, int line_no, const std::string& value) {
    int out = 0;
    const auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        fail(source, line_no, "expected an integer, got '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& source, int line_no,
                    const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double out = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        fail(source, line_no, "expected a number, got '" + value + "'");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string current;
    std::istringstream stream(value);
    while (std::getline(stream, current, ',')) {
        current = trim(current);
        if (!current.empty()) items.push_back(current);
    }
    return items;
}

bayes::PriorKind parse_prior_kind(const std::string& source, int line_no,
                                  const std::string& name) {
    if (name == "page") return bayes::PriorKind::Page;
    if (name == "source") return bayes::PriorKind::Source;
    if (name == "format") return bayes::PriorKind::Format;
    fail(source, line_no, "unknown prior kind '" + name +
                              "' (expected page, source or format)");
}

std::vector<bayes::PageTier> parse_page_tiers(const std::string& source,
                                              int line_no,
                                              const std::string& value) {
    // "10:0.7,*:0.5" — the final "*" tier catches every remaining page.
    std::vector<bayes::PageTier> tiers;
    for (const auto& item : split_list(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            fail(source, line_no, "page tier must look like '10:0.7' or '*:0.5'");
        }
        const std::string page_part = trim(item.substr(0, colon));
        const std::string prior_part = trim(item.substr(colon + 1));
        bayes::PageTier tier;
        tier.max_page = page_part == "*"
                            ? bayes::kCatchAllPage
                            : parse_int(source, line_no, page_part);
        tier.prior = parse_double(source, line_no, prior_part);
        tiers.push_back(tier);
    }
    if (tiers.empty()) fail(source, line_no, "page_tiers must not be empty");
    return tiers;
}

}  // namespace

void PipelineConfig::validate() const {
    if (top_n < 1) throw DataError("top_n must be >= 1");
    if (dimension < 2) throw DataError("dimension must be >= 2");
    if (max_chars < 64) throw DataError("max_chars must be >= 64");
    if (provider.timeout_ms < 1) throw DataError("provider.timeout_ms must be >= 1");
    if (provider.max_in_flight < 1) {
        throw DataError("provider.max_in_flight must be >= 1");
    }
    prior.validate();
}

PipelineConfig parse_config(const std::string& text,
                            const std::string& source_name) {
    PipelineConfig cfg;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        // Strip comments outside quoted regions.
        bool in_quotes = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quotes = !in_quotes;
            if (line[i] == '#' && !in_quotes) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(source_name, line_no, "expected 'key = value'");
        }
        const auto key = parse_key(source_name, line_no, trim(line.substr(0, eq)));
        const std::string value = unquote(trim(line.substr(eq + 1)));

        const auto is = [&](std::initializer_list<const char*> path) {
            if (key.size() != path.size()) return false;
            auto it = path.begin();
            for (const auto& segment : key) {
                if (segment != *it++) return false;
            }
            return true;
        };

        if (is({"corpus_path"})) {
            cfg.corpus_path = value;
        } else if (is({"dimension"})) {
            cfg.dimension = parse_int(source_name, line_no, value);
        } else if (is({"top_n"})) {
            cfg.top_n = parse_int(source_name, line_no, value);
        } else if (is({"max_chars"})) {
            cfg.max_chars = parse_int(source_name, line_no, value);
        } else if (is({"mode"})) {
            if (value == "mock") {
                cfg.mode = judge::Mode::Mock;
            } else if (value == "llm") {
                cfg.mode = judge::Mode::Llm;
            } else {
                fail(source_name, line_no, "mode must be 'mock' or 'llm'");
            }
        } else if (is({"stopwords"})) {
            for (const auto& word : split_list(value)) cfg.stopwords.insert(word);
        } else if (is({"embedding", "endpoint"})) {
            cfg.embedding_endpoint = value;
        } else if (is({"prior", "threshold"})) {
            cfg.prior.threshold = parse_double(source_name, line_no, value);
        } else if (is({"prior", "default_source_prior"})) {
            cfg.prior.default_source_prior =
                parse_double(source_name, line_no, value);
        } else if (is({"prior", "format_bonus_prior"})) {
            cfg.prior.format_bonus_prior =
                parse_double(source_name, line_no, value);
        } else if (is({"prior", "enabled"})) {
            cfg.prior.enabled_priors.clear();
            for (const auto& name : split_list(value)) {
                cfg.prior.enabled_priors.insert(
                    parse_prior_kind(source_name, line_no, name));
            }
        } else if (is({"prior", "page_tiers"})) {
            cfg.prior.page_tiers = parse_page_tiers(source_name, line_no, value);
        } else if (key.size() == 3 && key[0] == "prior" && key[1] == "weight") {
            cfg.prior.weights[parse_prior_kind(source_name, line_no, key[2])] =
                parse_double(source_name, line_no, value);
        } else if (key.size() == 3 && key[0] == "prior" &&
                   key[1] == "source_reputation") {
            cfg.prior.source_reputation[key[2]] =
                parse_double(source_name, line_no, value);
        } else if (is({"provider", "endpoint"})) {
            cfg.provider.endpoint = value;
        } else if (is({"provider", "model"})) {
            cfg.provider.model = value;
        } else if (is({"provider", "credential_env"})) {
            cfg.provider.credential_env = value;
        } else if (is({"provider", "timeout_ms"})) {
            cfg.provider.timeout_ms = parse_int(source_name, line_no, value);
        } else if (is({"provider", "retry_backoff_ms"})) {
            cfg.provider.retry_backoff_ms = parse_int(source_name, line_no, value);
        } else if (is({"provider", "max_in_flight"})) {
            cfg.provider.max_in_flight = parse_int(source_name, line_no, value);
        } else {
            std::string joined;
            for (const auto& segment : key) {
                if (!joined.empty()) joined += '.';
                joined += segment;
            }
            fail(source_name, line_no, "unknown key '" + joined + "'");
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

}  // namespace brag::config
