#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "amsearch/errors.hpp"
#include "amsearch/gateway.hpp"

namespace amsearch {

struct CorpusDoc {
    std::string doc_id;
    std::string title;
    std::string body; // nonempty
};

struct RetrievalHit {
    std::string doc_id;
    double score = 0.0;
    std::string snippet;
};

struct IndexStats {
    std::size_t doc_count = 0;
    std::size_t term_count = 0; // distinct terms across the corpus
};

// Lowercases, maps every non-alphanumeric byte to a space and splits.
std::vector<std::string> tokenize_text(const std::string& text);

// One CorpusDoc per line: {"doc_id": ..., "title": ..., "body": ...}.
// Throws DataError naming the offending line.
std::vector<CorpusDoc> load_corpus_jsonl(const std::string& path);

class Retriever {
public:
    virtual ~Retriever() = default;
    // Hits sorted by descending score, ties by ascending doc_id. Only
    // documents sharing at least one term with the query appear.
    virtual std::vector<RetrievalHit> retrieve(const std::string& query, int top_k) const = 0;
};

// In-memory BM25 index. idf uses the ln(1 + (N - df + 0.5) / (df + 0.5))
// form, which keeps every score strictly positive on a term match.
class Bm25Index : public Retriever {
public:
    struct Params {
        double k1 = 1.2;
        double b = 0.75;
        int snippet_chars = 512;
    };

    Bm25Index() : Bm25Index(Params{}) {}
    explicit Bm25Index(Params params);

    // Builds the index from scratch; calling again replaces the previous
    // contents. Throws DataError on an empty list, a duplicate doc_id or an
    // empty body.
    IndexStats index_corpus(const std::vector<CorpusDoc>& docs);

    std::vector<RetrievalHit> retrieve(const std::string& query, int top_k) const override;

    // Score of one document against a query; exactly 0 without term overlap.
    // Throws std::out_of_range for unknown doc_ids.
    double score_doc(const std::string& query, const std::string& doc_id) const;

    IndexStats stats() const { return stats_; }
    const Params& params() const { return params_; }

private:
    struct DocEntry {
        std::string doc_id;
        std::string snippet;
        std::size_t length = 0;
        std::unordered_map<std::string, int> term_counts;
    };

    double score_entry(const std::vector<std::string>& query_terms, const DocEntry& entry) const;

    Params params_;
    std::vector<DocEntry> docs_;
    std::unordered_map<std::string, std::size_t> id_to_index_;
    std::unordered_map<std::string, int> doc_freq_;
    double avg_doc_len_ = 0.0;
    IndexStats stats_;
};

// Builds the association prompt from generated content plus retrieved
// snippets (each truncated to `snippet_cap` bytes) and resolves the reply:
// "" for the NONE sentinel, the model text verbatim otherwise.
std::string compose_association_text(const std::string& generated,
                                     const std::vector<RetrievalHit>& hits,
                                     Gateway& gateway,
                                     int snippet_cap);

// Retrieval plus composition behind one object. The engine consults it only
// when external-brain use is enabled.
class ExternalBrain {
public:
    struct Options {
        int top_k = 3;
        int snippet_chars = 512;
    };

    explicit ExternalBrain(std::shared_ptr<Retriever> retriever)
        : ExternalBrain(std::move(retriever), Options{}) {}
    ExternalBrain(std::shared_ptr<Retriever> retriever, Options options);

    std::vector<RetrievalHit> retrieve(const std::string& query) const;
    std::string compose_association(const std::string& generated,
                                    const std::vector<RetrievalHit>& hits,
                                    Gateway& gateway) const;

    const Options& options() const { return options_; }

private:
    std::shared_ptr<Retriever> retriever_;
    Options options_;
};

} // namespace amsearch
