#include "amsearch/brain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "amsearch/prompts.hpp"

namespace amsearch {

std::vector<std::string> tokenize_text(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<CorpusDoc> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open corpus file: " + path);
    std::vector<CorpusDoc> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw DataError("corpus line " + std::to_string(line_no) + " is not a JSON object");
        if (!doc.contains("doc_id") || !doc.contains("body"))
            throw DataError("corpus line " + std::to_string(line_no) +
                            " needs doc_id and body");
        CorpusDoc entry;
        entry.doc_id = doc.at("doc_id").get<std::string>();
        entry.title = doc.value("title", std::string{});
        entry.body = doc.at("body").get<std::string>();
        if (entry.body.empty())
            throw DataError("corpus line " + std::to_string(line_no) + " (doc_id " +
                            entry.doc_id + ") has an empty body");
        docs.push_back(std::move(entry));
    }
    return docs;
}

Bm25Index::Bm25Index(Params params) : params_(params) {
    if (params_.k1 < 0.0 || params_.b < 0.0 || params_.b > 1.0)
        throw std::invalid_argument("bm25 parameters out of range");
    if (params_.snippet_chars < 1)
        throw std::invalid_argument("snippet_chars must be >= 1");
}

IndexStats Bm25Index::index_corpus(const std::vector<CorpusDoc>& docs) {
    if (docs.empty())
        throw DataError("cannot index an empty corpus");
    docs_.clear();
    id_to_index_.clear();
    doc_freq_.clear();

    std::size_t total_len = 0;
    for (const CorpusDoc& doc : docs) {
        if (doc.body.empty())
            throw DataError("doc_id " + doc.doc_id + " has an empty body");
        if (id_to_index_.count(doc.doc_id))
            throw DataError("duplicate doc_id: " + doc.doc_id);
        DocEntry entry;
        entry.doc_id = doc.doc_id;
        entry.snippet = doc.body.substr(0, static_cast<std::size_t>(params_.snippet_chars));
        const auto tokens = tokenize_text(doc.body);
        entry.length = tokens.size();
        total_len += tokens.size();
        for (const std::string& token : tokens)
            entry.term_counts[token] += 1;
        for (const auto& [term, count] : entry.term_counts)
            doc_freq_[term] += 1;
        id_to_index_[doc.doc_id] = docs_.size();
        docs_.push_back(std::move(entry));
    }
    avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(docs_.size());
    stats_.doc_count = docs_.size();
    stats_.term_count = doc_freq_.size();
    return stats_;
}

double Bm25Index::score_entry(const std::vector<std::string>& query_terms,
                              const DocEntry& entry) const {
    const double n_docs = static_cast<double>(docs_.size());
    double score = 0.0;
    for (const std::string& term : query_terms) {
        const auto tf_it = entry.term_counts.find(term);
        if (tf_it == entry.term_counts.end()) continue;
        const double tf = tf_it->second;
        const double df = static_cast<double>(doc_freq_.at(term));
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        const double norm =
            tf * (params_.k1 + 1.0) /
            (tf + params_.k1 * (1.0 - params_.b +
                                params_.b * static_cast<double>(entry.length) / avg_doc_len_));
        score += idf * norm;
    }
    return score;
}

std::vector<RetrievalHit> Bm25Index::retrieve(const std::string& query, int top_k) const {
    if (top_k < 1)
        throw std::invalid_argument("top_k must be >= 1");
    const auto query_terms = tokenize_text(query);
    std::vector<RetrievalHit> hits;
    for (const DocEntry& entry : docs_) {
        const double score = score_entry(query_terms, entry);
        if (score <= 0.0) continue; // no term overlap
        RetrievalHit hit;
        hit.doc_id = entry.doc_id;
        hit.score = score;
        hit.snippet = entry.snippet;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > static_cast<std::size_t>(top_k))
        hits.resize(static_cast<std::size_t>(top_k));
    return hits;
}

double Bm25Index::score_doc(const std::string& query, const std::string& doc_id) const {
    const auto it = id_to_index_.find(doc_id);
    if (it == id_to_index_.end())
        throw std::out_of_range("no document with doc_id " + doc_id);
    return score_entry(tokenize_text(query), docs_[it->second]);
}

std::string compose_association_text(const std::string& generated,
                                     const std::vector<RetrievalHit>& hits,
                                     Gateway& gateway,
                                     int snippet_cap) {
    std::vector<std::string> snippets;
    snippets.reserve(hits.size());
    for (const RetrievalHit& hit : hits)
        snippets.push_back(hit.snippet.substr(0, static_cast<std::size_t>(snippet_cap)));
    const PromptBundle bundle = assemble_association_prompt(generated, snippets);
    return resolve_association_reply(gateway.complete(bundle).text);
}

ExternalBrain::ExternalBrain(std::shared_ptr<Retriever> retriever, Options options)
    : retriever_(std::move(retriever)), options_(options) {
    if (!retriever_)
        throw std::invalid_argument("external brain requires a retriever");
    if (options_.top_k < 1)
        throw std::invalid_argument("top_k must be >= 1");
    if (options_.snippet_chars < 1)
        throw std::invalid_argument("snippet_chars must be >= 1");
}

std::vector<RetrievalHit> ExternalBrain::retrieve(const std::string& query) const {
    return retriever_->retrieve(query, options_.top_k);
}

std::string ExternalBrain::compose_association(const std::string& generated,
                                               const std::vector<RetrievalHit>& hits,
                                               Gateway& gateway) const {
    return compose_association_text(generated, hits, gateway, options_.snippet_chars);
}

} // namespace amsearch
