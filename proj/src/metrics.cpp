#include "aviator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "aviator/errors.hpp"
#include "aviator/simple_ast.hpp"

namespace aviator {

void CodeBleuWeights::validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || delta < 0) {
        throw DomainError("codebleu weights must be non-negative");
    }
    double sum = alpha + beta + gamma + delta;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw DomainError("codebleu weights must sum to 1, got " + std::to_string(sum));
    }
}

namespace {

std::string ngram_key(const std::vector<Token>& tokens, std::size_t start, int n) {
    std::string key;
    for (int k = 0; k < n; ++k) {
        const Token& t = tokens[start + static_cast<std::size_t>(k)];
        key += static_cast<char>('0' + static_cast<int>(t.kind));
        key += t.text;
        key += '\x1f';
    }
    return key;
}

// Shared BLEU core; weight_of gives each candidate n-gram's count weight
// (keyed by its head token).
template <typename WeightFn>
double bleu_core(const std::vector<Token>& cand, const std::vector<Token>& ref, int max_n,
                 WeightFn weight_of) {
    if (max_n < 1) throw DomainError("max_n must be >= 1");
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty()) return 0.0;

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        std::map<std::string, int> ref_counts;
        if (static_cast<std::size_t>(n) <= ref.size()) {
            for (std::size_t s = 0; s + static_cast<std::size_t>(n) <= ref.size(); ++s) {
                ref_counts[ngram_key(ref, s, n)] += 1;
            }
        }
        std::map<std::string, std::pair<int, double>> cand_counts;  // count, weight
        if (static_cast<std::size_t>(n) <= cand.size()) {
            for (std::size_t s = 0; s + static_cast<std::size_t>(n) <= cand.size(); ++s) {
                auto& entry = cand_counts[ngram_key(cand, s, n)];
                entry.first += 1;
                entry.second = weight_of(cand[s]);
            }
        }
        double matched = 0.0;
        double total = 0.0;
        for (const auto& [key, entry] : cand_counts) {
            auto it = ref_counts.find(key);
            int clip = it == ref_counts.end() ? 0 : std::min(entry.first, it->second);
            matched += entry.second * clip;
            total += entry.second * entry.first;
        }
        double p;
        if (n == 1) {
            p = total > 0 ? matched / total : 0.0;
            if (p <= 0.0) return 0.0;
        } else {
            p = (matched + 1.0) / (total + 1.0);
        }
        log_sum += std::log(p) / max_n;
    }
    double bp = 1.0;
    if (cand.size() < ref.size()) {
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
    }
    return bp * std::exp(log_sum);
}

double multiset_fraction(const std::map<std::string, int>& ref,
                         const std::map<std::string, int>& cand) {
    long long total = 0, matched = 0;
    for (const auto& [key, count] : ref) {
        total += count;
        auto it = cand.find(key);
        if (it != cand.end()) matched += std::min(count, it->second);
    }
    if (total == 0) return 1.0;  // vacuous
    return static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace

std::vector<Token> scoring_tokens(std::string_view code, Dialect dialect) {
    TokenSequence seq = tokenize(code, dialect);
    return substantive_tokens(seq);
}

double ngram_bleu(const std::vector<Token>& candidate, const std::vector<Token>& reference,
                  int max_n) {
    return bleu_core(candidate, reference, max_n, [](const Token&) { return 1.0; });
}

double weighted_ngram_bleu(const std::vector<Token>& candidate,
                           const std::vector<Token>& reference, double keyword_weight,
                           int max_n) {
    if (keyword_weight < 1.0) throw DomainError("keyword_weight must be >= 1");
    return bleu_core(candidate, reference, max_n, [keyword_weight](const Token& head) {
        return head.kind == TokenKind::Keyword ? keyword_weight : 1.0;
    });
}

namespace {

double structural_score(std::string_view candidate, std::string_view reference,
                        Dialect dialect, bool* fallback, bool dataflow) {
    if (fallback) *fallback = false;
    std::vector<Token> cand_toks = scoring_tokens(candidate, dialect);
    std::vector<Token> ref_toks = scoring_tokens(reference, dialect);
    if (same_lexemes(cand_toks, ref_toks)) return 1.0;
    if (cand_toks.empty()) return 0.0;

    ast::ParseResult cand_parse = ast::parse_code(candidate, dialect);
    ast::ParseResult ref_parse = ast::parse_code(reference, dialect);
    if (cand_parse.degenerate || ref_parse.degenerate) {
        if (fallback) *fallback = true;
        return ngram_bleu(cand_toks, ref_toks, 4);
    }
    if (dataflow) {
        return multiset_fraction(ast::def_use_edges(ref_parse.root),
                                 ast::def_use_edges(cand_parse.root));
    }
    return multiset_fraction(ast::subtree_multiset(ref_parse.root),
                             ast::subtree_multiset(cand_parse.root));
}

}  // namespace

double ast_match_score(std::string_view candidate, std::string_view reference, Dialect dialect,
                       bool* fallback) {
    return structural_score(candidate, reference, dialect, fallback, false);
}

double dataflow_match_score(std::string_view candidate, std::string_view reference,
                            Dialect dialect, bool* fallback) {
    return structural_score(candidate, reference, dialect, fallback, true);
}

ScoreBreakdown codebleu(std::string_view candidate, std::string_view reference,
                        const CodeBleuWeights& weights, const CodeBleuConfig& config) {
    weights.validate();
    ScoreBreakdown out;
    std::vector<Token> cand = scoring_tokens(candidate, config.dialect);
    std::vector<Token> ref = scoring_tokens(reference, config.dialect);
    out.bleu = ngram_bleu(cand, ref, config.max_ngram);
    out.weighted_bleu = weighted_ngram_bleu(cand, ref, config.keyword_weight, config.max_ngram);
    out.ast_match = ast_match_score(candidate, reference, config.dialect, &out.ast_fallback);
    out.dataflow_match =
        dataflow_match_score(candidate, reference, config.dialect, &out.dataflow_fallback);
    out.composite = weights.alpha * out.bleu + weights.beta * out.weighted_bleu +
                    weights.gamma * out.ast_match + weights.delta * out.dataflow_match;
    return out;
}

MeanStd aisr(const RunStats& stats) {
    const auto& s = stats.success_rates;
    if (s.empty()) throw DomainError("aisr needs at least one run");
    for (double v : s) {
        if (v < 0.0 || v > 1.0) throw DomainError("success rate outside [0, 1]");
    }
    MeanStd out;
    for (double v : s) out.mean += v;
    out.mean /= static_cast<double>(s.size());
    double acc = 0.0;
    for (double v : s) acc += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(acc / static_cast<double>(s.size()));
    return out;
}

double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
        throw DomainError("pass_at_k domain violation: n=" + std::to_string(n) +
                          " c=" + std::to_string(c) + " k=" + std::to_string(k));
    }
    if (c == 0) return 0.0;
    if (c > n - k) return 1.0;
    double prod = 1.0;
    for (int i = n - c + 1; i <= n; ++i) {
        prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    }
    return 1.0 - prod;
}

double sft_nll(const std::vector<double>& token_logprobs) {
    double acc = 0.0;
    for (double lp : token_logprobs) {
        if (lp > 0.0) throw DomainError("log probability must be <= 0");
        acc -= lp;
    }
    return acc;
}

std::vector<double> grpo_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) throw DomainError("grpo group size must be >= 2");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    double sigma = std::sqrt(var / static_cast<double>(rewards.size()));
    std::vector<double> out(rewards.size(), 0.0);
    if (sigma == 0.0) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sigma;
    return out;
}

void CandidateGroup::compute_advantages() { advantages = grpo_advantages(rewards); }

void CandidateGroup::validate() const {
    std::size_t g = rewards.size();
    if (g < 2) throw DomainError("grpo group size must be >= 2");
    if (logprob_new.size() != g || logprob_old.size() != g || logprob_ref.size() != g) {
        throw DomainError("grpo group log-probability lists must have length G");
    }
    if (!advantages.empty() && advantages.size() != g) {
        throw DomainError("grpo group advantages must have length G");
    }
}

double kl_penalty(double logprob_new, double logprob_ref) {
    if (!std::isfinite(logprob_new) || !std::isfinite(logprob_ref)) {
        throw DomainError("kl_penalty needs finite log probabilities");
    }
    double d = logprob_ref - logprob_new;
    return std::exp(d) - d - 1.0;
}

double grpo_objective(const CandidateGroup& group, double epsilon, double beta) {
    group.validate();
    if (epsilon <= 0.0) throw DomainError("epsilon must be positive");
    if (beta < 0.0) throw DomainError("beta must be non-negative");
    std::vector<double> adv = grpo_advantages(group.rewards);
    const std::size_t g = group.rewards.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        double ratio = std::exp(group.logprob_new[i] - group.logprob_old[i]);
        if (!std::isfinite(ratio)) throw DomainError("non-finite policy ratio");
        double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
        double term = std::min(ratio * adv[i], clipped * adv[i]);
        acc += term - beta * kl_penalty(group.logprob_new[i], group.logprob_ref[i]);
    }
    return acc / static_cast<double>(g);
}

}  // namespace aviator
