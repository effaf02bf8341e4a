#include "aviator/rag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include "json.hpp"

#include "aviator/digest.hpp"
#include "aviator/errors.hpp"

namespace aviator {

KnowledgePair make_knowledge_pair(std::string id, std::string benign, std::string vulnerable,
                                  std::string cwe, Dialect dialect) {
    if (id.empty()) throw DomainError("knowledge pair id must be non-empty");
    if (cwe.empty()) throw DomainError("knowledge pair cwe must be non-empty");
    KnowledgePair p;
    p.id = std::move(id);
    p.benign_code = std::move(benign);
    p.vulnerable_code = std::move(vulnerable);
    p.cwe = std::move(cwe);
    p.diff = line_diff(p.benign_code, p.vulnerable_code);
    p.token_count = tokenize(p.benign_code, dialect).size();
    return p;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw DomainError("embedding dimension must be positive");
}

namespace {

// splitmix64; endianness-free so embeddings are identical across platforms
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<float> HashEmbeddingProvider::embed(std::string_view text) {
    std::uint64_t state = fnv1a64(text);
    std::vector<float> v(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        // uniform in [-1, 1) from the top 24 bits
        std::uint64_t bits = splitmix64(state) >> 40;
        v[i] = static_cast<float>(static_cast<double>(bits) / 8388608.0 - 1.0);
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * static_cast<double>(x);
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        v.assign(dim_, 0.0f);
        v[0] = 1.0f;
        return v;
    }
    for (float& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
    return v;
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw DomainError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::string embedding_text(const KnowledgePair& pair, std::size_t token_limit, bool& truncated,
                           Dialect dialect) {
    TokenSequence seq = tokenize(pair.benign_code, dialect);
    if (seq.size() <= token_limit) {
        truncated = false;
        return pair.benign_code;
    }
    truncated = true;
    TokenSequence head;
    head.tokens.assign(seq.tokens.begin(),
                       seq.tokens.begin() + static_cast<std::ptrdiff_t>(token_limit));
    return detokenize(head);
}

}  // namespace

KnowledgeBase KnowledgeBase::build(std::vector<KnowledgePair> pairs, EmbeddingProvider& embedder,
                                   std::size_t token_limit) {
    if (pairs.empty()) throw DomainError("knowledge base needs at least one pair");
    std::set<std::string> seen;
    for (const KnowledgePair& p : pairs) {
        if (!seen.insert(p.id).second) {
            throw DomainError("duplicate knowledge pair id: " + p.id);
        }
    }
    KnowledgeBase kb;
    kb.dimension_ = embedder.dimension();
    kb.entries_.reserve(pairs.size());
    for (KnowledgePair& p : pairs) {
        KbEntry entry;
        std::string text = embedding_text(p, token_limit, entry.truncated, Dialect::Cpp);
        entry.embedding = embedder.embed(text);
        if (entry.embedding.size() != kb.dimension_) {
            throw DomainError("embedding provider returned wrong dimension");
        }
        for (float x : entry.embedding) {
            if (!std::isfinite(x)) throw DomainError("embedding has non-finite component");
        }
        entry.pair = std::move(p);
        kb.entries_.push_back(std::move(entry));
    }
    return kb;
}

std::vector<const KnowledgePair*> KnowledgeBase::retrieve(std::string_view query_code,
                                                          EmbeddingProvider& embedder,
                                                          std::size_t k) const {
    if (entries_.empty()) throw DomainError("retrieve on empty knowledge base");
    if (k < 1) throw DomainError("retrieval k must be >= 1");
    std::vector<float> q = embedder.embed(std::string(query_code));
    struct Scored {
        double similarity;
        const KbEntry* entry;
    };
    std::vector<Scored> scored;
    scored.reserve(entries_.size());
    for (const KbEntry& e : entries_) {
        scored.push_back({cosine_similarity(q, e.embedding), &e});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.entry->pair.id < b.entry->pair.id;
    });
    std::size_t take = std::min(k, scored.size());
    std::vector<const KnowledgePair*> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(&scored[i].entry->pair);
    return out;
}

void KnowledgeBase::save(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream pairs_out(dir / "pairs.jsonl");
    if (!pairs_out) throw Error("cannot write " + (dir / "pairs.jsonl").string());
    for (const KbEntry& e : entries_) {
        nlohmann::ordered_json j{{"id", e.pair.id},
                                 {"benign", e.pair.benign_code},
                                 {"vulnerable", e.pair.vulnerable_code},
                                 {"cwe", e.pair.cwe}};
        pairs_out << j.dump() << "\n";
    }
    pairs_out.close();

    nlohmann::ordered_json header;
    header["dimension"] = dimension_;
    header["count"] = entries_.size();
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    nlohmann::ordered_json truncated = nlohmann::ordered_json::array();
    for (const KbEntry& e : entries_) {
        ids.push_back(e.pair.id);
        truncated.push_back(e.truncated);
    }
    header["ids"] = std::move(ids);
    header["truncated"] = std::move(truncated);
    std::string header_text = header.dump();

    std::ofstream bin(dir / "embeddings.bin", std::ios::binary);
    if (!bin) throw Error("cannot write " + (dir / "embeddings.bin").string());
    std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());
    unsigned char len_bytes[4] = {
        static_cast<unsigned char>(header_len & 0xFF),
        static_cast<unsigned char>((header_len >> 8) & 0xFF),
        static_cast<unsigned char>((header_len >> 16) & 0xFF),
        static_cast<unsigned char>((header_len >> 24) & 0xFF),
    };
    bin.write(reinterpret_cast<const char*>(len_bytes), 4);
    bin.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const KbEntry& e : entries_) {
        for (float x : e.embedding) {
            std::uint32_t u;
            static_assert(sizeof(u) == sizeof(x));
            std::memcpy(&u, &x, 4);
            unsigned char fb[4] = {
                static_cast<unsigned char>(u & 0xFF),
                static_cast<unsigned char>((u >> 8) & 0xFF),
                static_cast<unsigned char>((u >> 16) & 0xFF),
                static_cast<unsigned char>((u >> 24) & 0xFF),
            };
            bin.write(reinterpret_cast<const char*>(fb), 4);
        }
    }
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir, Dialect dialect) {
    std::vector<KnowledgePair> pairs = load_kb_pairs(dir / "pairs.jsonl", dialect);

    std::ifstream bin(dir / "embeddings.bin", std::ios::binary);
    if (!bin) throw Error("cannot read " + (dir / "embeddings.bin").string());
    unsigned char len_bytes[4];
    bin.read(reinterpret_cast<char*>(len_bytes), 4);
    if (!bin) throw ParseFailure("embeddings file truncated");
    std::uint32_t header_len = static_cast<std::uint32_t>(len_bytes[0]) |
                               (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                               (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                               (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    std::string header_text(header_len, '\0');
    bin.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!bin) throw ParseFailure("embeddings header truncated");
    nlohmann::json header = nlohmann::json::parse(header_text);
    std::size_t dimension = header.at("dimension").get<std::size_t>();
    std::size_t count = header.at("count").get<std::size_t>();
    if (count != pairs.size()) {
        throw ParseFailure("embeddings count does not match pairs file");
    }

    KnowledgeBase kb;
    kb.dimension_ = dimension;
    kb.entries_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        KbEntry entry;
        if (header.at("ids")[i].get<std::string>() != pairs[i].id) {
            throw ParseFailure("embeddings ids out of order with pairs file");
        }
        entry.truncated = header.at("truncated")[i].get<bool>();
        entry.embedding.resize(dimension);
        for (std::size_t d = 0; d < dimension; ++d) {
            unsigned char fb[4];
            bin.read(reinterpret_cast<char*>(fb), 4);
            if (!bin) throw ParseFailure("embeddings data truncated");
            std::uint32_t u = static_cast<std::uint32_t>(fb[0]) |
                              (static_cast<std::uint32_t>(fb[1]) << 8) |
                              (static_cast<std::uint32_t>(fb[2]) << 16) |
                              (static_cast<std::uint32_t>(fb[3]) << 24);
            float x;
            std::memcpy(&x, &u, 4);
            entry.embedding[d] = x;
        }
        entry.pair = std::move(pairs[i]);
        kb.entries_.push_back(std::move(entry));
    }
    return kb;
}

std::string annotate_pair(const KnowledgePair& pair) {
    return "// " + pair.cwe + " injected example: " + pair.id + "\n" +
           render_marked_candidate(pair.diff, pair.vulnerable_code);
}

std::vector<KnowledgePair> load_kb_pairs(const std::filesystem::path& path, Dialect dialect) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<KnowledgePair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseFailure(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        for (const char* field : {"id", "benign", "vulnerable", "cwe"}) {
            if (!j.contains(field)) {
                throw ParseFailure(path.string() + ":" + std::to_string(line_no) +
                                   ": missing field '" + field + "'");
            }
        }
        pairs.push_back(make_knowledge_pair(j["id"].get<std::string>(),
                                            j["benign"].get<std::string>(),
                                            j["vulnerable"].get<std::string>(),
                                            j["cwe"].get<std::string>(), dialect));
    }
    return pairs;
}

}  // namespace aviator
