#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aviator/line_diff.hpp"
#include "aviator/token.hpp"

namespace aviator {

struct KnowledgePair {
    std::string id;
    std::string benign_code;
    std::string vulnerable_code;
    std::string cwe;
    LineDiff diff;                // line_diff(benign_code, vulnerable_code)
    std::size_t token_count = 0;  // lexer tokens of the benign code
};

// Computes diff and token count; throws DomainError on empty id or cwe.
KnowledgePair make_knowledge_pair(std::string id, std::string benign, std::string vulnerable,
                                  std::string cwe, Dialect dialect = Dialect::Cpp);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<float> embed(std::string_view text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Deterministic offline embedder: a content-hash seeded pseudo-random unit
// vector. Identical text always maps to the identical vector.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = 64);
    std::vector<float> embed(std::string_view text) override;
    std::size_t dimension() const override { return dim_; }

private:
    std::size_t dim_;
};

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

struct KbEntry {
    KnowledgePair pair;
    std::vector<float> embedding;
    bool truncated = false;  // benign code exceeded the embedding token limit
};

inline constexpr std::size_t kEmbeddingTokenLimit = 8192;

class KnowledgeBase {
public:
    // Embeds each pair's benign code; head-truncates texts over token_limit
    // for embedding only and flags them. Duplicate ids are an error.
    static KnowledgeBase build(std::vector<KnowledgePair> pairs, EmbeddingProvider& embedder,
                               std::size_t token_limit = kEmbeddingTokenLimit);

    // Cosine similarity descending, ties by ascending id, clamped to size.
    std::vector<const KnowledgePair*> retrieve(std::string_view query_code,
                                               EmbeddingProvider& embedder,
                                               std::size_t k) const;

    void save(const std::filesystem::path& dir) const;
    static KnowledgeBase load(const std::filesystem::path& dir, Dialect dialect = Dialect::Cpp);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t dimension() const { return dimension_; }
    const std::vector<KbEntry>& entries() const { return entries_; }

private:
    std::vector<KbEntry> entries_;
    std::size_t dimension_ = 0;
};

// Renders the vulnerable side of a pair with '+' markers on added/changed
// lines and the CWE id in the header.
std::string annotate_pair(const KnowledgePair& pair);

// Reads KB input JSONL: one {"id", "benign", "vulnerable", "cwe"} per line.
std::vector<KnowledgePair> load_kb_pairs(const std::filesystem::path& path,
                                         Dialect dialect = Dialect::Cpp);

}  // namespace aviator
