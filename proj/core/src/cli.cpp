#include "brag/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "brag/config.hpp"
#include "brag/corpus.hpp"
#include "brag/errors.hpp"
#include "brag/judge.hpp"
#include "brag/llm.hpp"
#include "brag/prompt.hpp"
#include "brag/retrieval.hpp"

namespace brag::cli {

namespace {

using config::PipelineConfig;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> corpus;
    std::optional<int> top_n;
    std::optional<int> dimension;
    std::optional<int> max_chars;
    std::optional<double> threshold;
    std::optional<std::string> mode;
};

void add_common_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--config", flags.config_path,
                   "Config file path (default: $BRAG_CONFIG)");
    cmd.add_option("--corpus", flags.corpus, "Override corpus_path");
    cmd.add_option("--top-n", flags.top_n, "Override top_n");
    cmd.add_option("--dimension", flags.dimension, "Override embedding dimension");
    cmd.add_option("--max-chars", flags.max_chars, "Override chunking max_chars");
    cmd.add_option("--threshold", flags.threshold, "Override posterior threshold");
    cmd.add_option("--mode", flags.mode, "Override mode (mock or llm)");
}

PipelineConfig resolve_config(const CommonFlags& flags) {
    std::string path = flags.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("BRAG_CONFIG"); env && *env) {
            path = env;
        }
    }
    PipelineConfig cfg =
        path.empty() ? PipelineConfig{} : config::load_config(path);

    if (flags.corpus) cfg.corpus_path = *flags.corpus;
    if (flags.top_n) cfg.top_n = *flags.top_n;
    if (flags.dimension) cfg.dimension = *flags.dimension;
    if (flags.max_chars) cfg.max_chars = *flags.max_chars;
    if (flags.threshold) cfg.prior.threshold = *flags.threshold;
    if (flags.mode) {
        if (*flags.mode == "mock") {
            cfg.mode = judge::Mode::Mock;
        } else if (*flags.mode == "llm") {
            cfg.mode = judge::Mode::Llm;
        } else {
            throw UsageError("--mode must be 'mock' or 'llm'");
        }
    }
    cfg.validate();
    return cfg;
}

std::unique_ptr<llm::Provider> make_provider(const PipelineConfig& cfg) {
    if (cfg.mode == judge::Mode::Mock) {
        return std::make_unique<llm::MockProvider>(0);
    }
    if (cfg.provider.endpoint.empty()) {
        throw DataError("provider.endpoint is required in llm mode");
    }
    llm::OpenAiProviderConfig pc;
    pc.endpoint = cfg.provider.endpoint;
    pc.credential_env = cfg.provider.credential_env;
    pc.timeout_ms = cfg.provider.timeout_ms;
    pc.retry_backoff_ms = cfg.provider.retry_backoff_ms;
    pc.max_in_flight = cfg.provider.max_in_flight;
    return std::make_unique<llm::OpenAiProvider>(pc);
}

retrieval::Index build_index(const PipelineConfig& cfg,
                             const std::vector<corpus::Chunk>& chunks) {
    if (!cfg.embedding_endpoint.empty()) {
        return retrieval::Index::build(
            chunks, std::make_shared<retrieval::RemoteEmbedder>(
                        cfg.embedding_endpoint, cfg.dimension,
                        cfg.provider.timeout_ms));
    }
    return retrieval::Index::build(chunks, cfg.dimension, cfg.stopwords);
}

double likelihood_for(const PipelineConfig& cfg, llm::Provider* provider,
                      const std::string& question, const corpus::Chunk& chunk,
                      std::optional<double> presupplied, std::ostream& err) {
    if (presupplied) return *presupplied;
    if (cfg.mode == judge::Mode::Mock) {
        return bayes::lexical_likelihood(question, chunk.text);
    }
    const auto warn = [&err](const std::string& message) {
        err << "warning: " << message << "\n";
    };
    return llm::grade_likelihood(*provider, cfg.provider.model, question, chunk,
                                 warn);
}

void print_scored_table(std::ostream& out,
                        const std::vector<bayes::ScoredChunk>& scored) {
    std::size_t id_width = 8;
    std::size_t source_width = 6;
    for (const auto& s : scored) {
        id_width = std::max(id_width, s.chunk.chunk_id.size());
        source_width = std::max(source_width, s.chunk.source.size());
    }
    out << std::left << std::setw(static_cast<int>(id_width) + 2) << "chunk_id"
        << std::setw(static_cast<int>(source_width) + 2) << "source"
        << std::setw(6) << "page" << std::setw(12) << "likelihood"
        << std::setw(8) << "prior" << std::setw(11) << "posterior"
        << "included" << "\n";
    for (const auto& s : scored) {
        std::ostringstream row;
        row << std::left << std::setw(static_cast<int>(id_width) + 2)
            << s.chunk.chunk_id << std::setw(static_cast<int>(source_width) + 2)
            << s.chunk.source << std::setw(6) << s.chunk.page << std::fixed
            << std::setprecision(2) << std::setw(12) << s.likelihood
            << std::setw(8) << s.prior << std::setw(11) << s.posterior
            << (s.included ? "yes" : "no");
        out << row.str() << "\n";
    }
}

std::string scored_to_json(const std::vector<bayes::ScoredChunk>& scored) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : scored) {
        rows.push_back({{"chunk_id", s.chunk.chunk_id},
                        {"source", s.chunk.source},
                        {"page", s.chunk.page},
                        {"likelihood", s.likelihood},
                        {"prior", s.prior},
                        {"posterior", s.posterior},
                        {"included", s.included}});
    }
    return rows.dump(2) + "\n";
}

std::vector<corpus::Chunk> corpus_chunks(const PipelineConfig& cfg) {
    if (cfg.corpus_path.empty()) {
        throw DataError("corpus_path is not configured (set it in the config "
                        "file or pass --corpus)");
    }
    std::vector<corpus::Chunk> chunks;
    for (const auto& doc : corpus::load_corpus(cfg.corpus_path)) {
        auto doc_chunks = corpus::chunk_document(doc, cfg.max_chars);
        chunks.insert(chunks.end(), doc_chunks.begin(), doc_chunks.end());
    }
    return chunks;
}

// ---- subcommands ------------------------------------------------------------

int cmd_ingest(const PipelineConfig& cfg, std::ostream& out) {
    if (cfg.corpus_path.empty()) {
        throw DataError("corpus_path is not configured (set it in the config "
                        "file or pass --corpus)");
    }
    const auto docs = corpus::load_corpus(cfg.corpus_path);
    std::size_t pages = 0;
    std::size_t chunk_count = 0;
    std::size_t bulleted = 0;
    std::size_t min_chars = 0;
    std::size_t max_chars = 0;
    std::size_t total_chars = 0;
    for (const auto& doc : docs) {
        pages += doc.pages.size();
        for (const auto& chunk : corpus::chunk_document(doc, cfg.max_chars)) {
            ++chunk_count;
            if (chunk.format_flags.count(corpus::FormatFlag::Bulleted)) ++bulleted;
            const auto n = chunk.text.size();
            total_chars += n;
            min_chars = chunk_count == 1 ? n : std::min(min_chars, n);
            max_chars = std::max(max_chars, n);
        }
    }
    out << "documents:       " << docs.size() << "\n";
    out << "pages:           " << pages << "\n";
    out << "chunks:          " << chunk_count << "\n";
    out << "bulleted chunks: " << bulleted << "\n";
    if (chunk_count > 0) {
        std::ostringstream avg;
        avg << std::fixed << std::setprecision(1)
            << static_cast<double>(total_chars) / static_cast<double>(chunk_count);
        out << "chunk chars:     min " << min_chars << " / avg " << avg.str()
            << " / max " << max_chars << "\n";
    }
    return kExitOk;
}

int cmd_query(const PipelineConfig& cfg, const std::string& question, bool send,
              std::ostream& out, std::ostream& err) {
    const auto chunks = corpus_chunks(cfg);
    const auto index = build_index(cfg, chunks);
    const auto hits = retrieval::search(index, question, cfg.top_n);
    if (hits.empty()) throw DataError("corpus produced no chunks to search");

    std::vector<corpus::Chunk> retrieved;
    retrieved.reserve(hits.size());
    for (const auto& hit : hits) retrieved.push_back(*index.find(hit.chunk_id));

    std::unique_ptr<llm::Provider> provider;
    if (cfg.mode == judge::Mode::Llm || send) provider = make_provider(cfg);

    std::vector<double> likelihoods;
    likelihoods.reserve(retrieved.size());
    for (const auto& chunk : retrieved) {
        likelihoods.push_back(likelihood_for(cfg, provider.get(), question,
                                             chunk, std::nullopt, err));
    }
    const auto scored = bayes::score_chunks(question, retrieved, likelihoods,
                                            cfg.prior);
    print_scored_table(out, scored);

    const auto bundle = prompt::render_scored(question, scored);
    out << "--- prompt (" << prompt::to_string(bundle.template_id) << ") ---\n";
    out << bundle.rendered;

    if (send) {
        llm::CompletionRequest request;
        request.model = cfg.provider.model;
        request.user = bundle.rendered;
        request.max_tokens = 512;
        const auto response = provider->complete(request);
        out << "--- answer (" << response.provider_id << ") ---\n";
        out << response.text << "\n";
    }
    return kExitOk;
}

int cmd_score(const PipelineConfig& cfg, const std::string& question,
              const std::string& chunk_file, bool as_json, std::ostream& out,
              std::ostream& err) {
    const auto records = corpus::load_chunk_file(chunk_file);
    if (records.empty()) throw DataError("chunk file is empty: " + chunk_file);

    std::unique_ptr<llm::Provider> provider;
    const bool needs_provider =
        cfg.mode == judge::Mode::Llm &&
        std::any_of(records.begin(), records.end(),
                    [](const corpus::ChunkRecord& r) { return !r.likelihood; });
    if (needs_provider) provider = make_provider(cfg);

    std::vector<corpus::Chunk> chunks;
    std::vector<double> likelihoods;
    for (const auto& record : records) {
        chunks.push_back(record.chunk);
        likelihoods.push_back(likelihood_for(cfg, provider.get(), question,
                                             record.chunk, record.likelihood,
                                             err));
    }
    const auto scored = bayes::score_chunks(question, chunks, likelihoods,
                                            cfg.prior);
    if (as_json) {
        out << scored_to_json(scored);
    } else {
        print_scored_table(out, scored);
        const auto included = std::count_if(
            scored.begin(), scored.end(),
            [](const bayes::ScoredChunk& s) { return s.included; });
        out << "included: " << included << " of " << scored.size() << "\n";
    }
    return kExitOk;
}

int cmd_eval(const PipelineConfig& cfg, std::uint64_t seed, int count,
             const std::string& out_path, std::ostream& out,
             std::ostream& err) {
    const judge::GeneratorConfig generator;
    const auto cases = judge::generate_cases(seed, count, generator);

    bayes::PriorConfig prior = cfg.prior;
    judge::apply_generator_sources(prior, generator);

    judge::EvalOptions opts;
    opts.dimension = cfg.dimension;
    opts.top_n = cfg.top_n;
    opts.warn = [&err](const std::string& message) {
        err << "warning: " << message << "\n";
    };
    std::unique_ptr<llm::Provider> provider;
    if (cfg.mode == judge::Mode::Llm) {
        provider = make_provider(cfg);
        opts.provider = provider.get();
        opts.model = cfg.provider.model;
    }

    const auto report = judge::run_eval(cases, prior, cfg.mode, opts);
    const auto json = judge::report_to_json(report, seed, cfg.mode);

    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw DataError("cannot write report to " + out_path);
    file << json;
    file.close();

    out << judge::report_to_table(report);
    out << "report: " << out_path << "\n";
    return kExitOk;
}

int cmd_render_prompt(const PipelineConfig& cfg, const std::string& template_id,
                      const std::string& question, const std::string& chunk_file,
                      const std::optional<std::string>& hint, std::ostream& out,
                      std::ostream& err) {
    const auto records = corpus::load_chunk_file(chunk_file);
    if (records.empty()) throw DataError("chunk file is empty: " + chunk_file);

    std::vector<corpus::Chunk> chunks;
    for (const auto& record : records) chunks.push_back(record.chunk);

    prompt::PromptBundle bundle;
    if (template_id == "baseline") {
        bundle = prompt::render_baseline(question, chunks);
    } else if (template_id == "inprompt-bayes") {
        bundle = prompt::render_inprompt_bayes(
            question, chunks, cfg.prior.threshold,
            hint.value_or(prompt::kDefaultPriorHint));
    } else if (template_id == "scored") {
        std::unique_ptr<llm::Provider> provider;
        const bool needs_provider =
            cfg.mode == judge::Mode::Llm &&
            std::any_of(records.begin(), records.end(),
                        [](const corpus::ChunkRecord& r) { return !r.likelihood; });
        if (needs_provider) provider = make_provider(cfg);
        std::vector<double> likelihoods;
        for (const auto& record : records) {
            likelihoods.push_back(likelihood_for(cfg, provider.get(), question,
                                                 record.chunk, record.likelihood,
                                                 err));
        }
        bundle = prompt::render_scored(
            question, bayes::score_chunks(question, chunks, likelihoods,
                                          cfg.prior));
    } else {
        throw UsageError("--template must be baseline, inprompt-bayes or scored");
    }
    out << bundle.rendered;
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"Bayesian evidence filtering for RAG pipelines"};
    app.name("brag");
    app.require_subcommand(1);

    CommonFlags flags;

    auto* ingest = app.add_subcommand(
        "ingest", "Validate a corpus file and print chunk statistics");
    add_common_flags(*ingest, flags);

    std::string question;
    bool send = false;
    auto* query = app.add_subcommand(
        "query", "Retrieve, score and assemble a prompt for a question");
    add_common_flags(*query, flags);
    query->add_option("-q,--question", question, "The question to answer")
        ->required();
    query->add_flag("--send", send, "Send the prompt to the provider");

    std::string chunk_file;
    bool as_json = false;
    auto* score = app.add_subcommand(
        "score", "Score an explicit chunk file, bypassing retrieval");
    add_common_flags(*score, flags);
    score->add_option("-q,--question", question, "The question to answer")
        ->required();
    score->add_option("--chunks", chunk_file, "Chunk file (corpus JSONL schema)")
        ->required();
    score->add_flag("--json", as_json, "Emit machine-readable JSON");

    std::uint64_t seed = 42;
    int count = 100;
    std::string report_path = "eval_report.json";
    auto* eval = app.add_subcommand(
        "eval", "Run the synthetic conflicting-evidence benchmark");
    add_common_flags(*eval, flags);
    eval->add_option("--seed", seed, "Generator seed");
    eval->add_option("--count", count, "Number of generated cases");
    eval->add_option("--out", report_path, "Report output path");

    std::string template_id;
    std::optional<std::string> hint;
    auto* render = app.add_subcommand(
        "render-prompt", "Emit a golden-comparable prompt rendering");
    add_common_flags(*render, flags);
    render
        ->add_option("--template", template_id,
                     "baseline, inprompt-bayes or scored")
        ->required();
    render->add_option("-q,--question", question, "The question to answer")
        ->required();
    render->add_option("--chunks", chunk_file, "Chunk file (corpus JSONL schema)")
        ->required();
    render->add_option("--hint", hint, "Prior hint sentence (inprompt-bayes)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        const auto cfg = resolve_config(flags);
        if (ingest->parsed()) return cmd_ingest(cfg, out);
        if (query->parsed()) return cmd_query(cfg, question, send, out, err);
        if (score->parsed())
            return cmd_score(cfg, question, chunk_file, as_json, out, err);
        if (eval->parsed())
            return cmd_eval(cfg, seed, count, report_path, out, err);
        if (render->parsed())
            return cmd_render_prompt(cfg, template_id, question, chunk_file,
                                     hint, out, err);
        err << app.help();
        return kExitUsage;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const ProviderError& e) {
        err << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace brag::cli
