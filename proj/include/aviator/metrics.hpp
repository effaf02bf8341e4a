#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aviator/token.hpp"

namespace aviator {

struct CodeBleuWeights {
    double alpha = 0.25;
    double beta = 0.25;
    double gamma = 0.25;
    double delta = 0.25;

    void validate() const;  // non-negative, sum == 1 within 1e-9
};

struct CodeBleuConfig {
    int max_ngram = 4;
    double keyword_weight = 5.0;
    Dialect dialect = Dialect::Cpp;
};

struct ScoreBreakdown {
    double bleu = 0.0;
    double weighted_bleu = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    double composite = 0.0;
    bool ast_fallback = false;       // unparseable input, token-level value used
    bool dataflow_fallback = false;
};

ScoreBreakdown codebleu(std::string_view candidate, std::string_view reference,
                        const CodeBleuWeights& weights = {},
                        const CodeBleuConfig& config = {});

// Geometric mean of clipped n-gram precisions times brevity penalty; +1
// smoothing on counts for n >= 2, none for unigrams. Empty candidate -> 0.
double ngram_bleu(const std::vector<Token>& candidate, const std::vector<Token>& reference,
                  int max_n = 4);

// As ngram_bleu, but an n-gram counts keyword_weight times when its head
// token is a language keyword.
double weighted_ngram_bleu(const std::vector<Token>& candidate,
                           const std::vector<Token>& reference,
                           double keyword_weight = 5.0, int max_n = 4);

double ast_match_score(std::string_view candidate, std::string_view reference,
                       Dialect dialect = Dialect::Cpp, bool* fallback = nullptr);

double dataflow_match_score(std::string_view candidate, std::string_view reference,
                            Dialect dialect = Dialect::Cpp, bool* fallback = nullptr);

// Tokens used for the BLEU components: whitespace and comments dropped.
std::vector<Token> scoring_tokens(std::string_view code, Dialect dialect = Dialect::Cpp);

struct RunStats {
    std::vector<double> success_rates;  // each in [0, 1]
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population (1/n) form
};

MeanStd aisr(const RunStats& stats);

// 1 - C(n-c, k)/C(n, k) in the stable product form; exact domain checks.
double pass_at_k(int n, int c, int k);

// Negative sum of per-token log probabilities; each input must be <= 0.
double sft_nll(const std::vector<double>& token_logprobs);

// (r_i - mean)/std with population std; all zeros when std == 0. G >= 2.
std::vector<double> grpo_advantages(const std::vector<double>& rewards);

struct CandidateGroup {
    std::string prompt_id;
    std::vector<double> rewards;
    std::vector<double> advantages;  // filled by compute_advantages()
    std::vector<double> logprob_new;
    std::vector<double> logprob_old;
    std::vector<double> logprob_ref;

    void compute_advantages();
    void validate() const;  // consistent sizes, G >= 2
};

// Clipped surrogate with per-sample KL penalty; ratios are sequence-level
// exp(logprob_new - logprob_old).
double grpo_objective(const CandidateGroup& group, double epsilon = 0.2, double beta = 0.04);

// exp(d) - d - 1 with d = logprob_ref - logprob_new; non-negative, zero iff
// the log probabilities agree.
double kl_penalty(double logprob_new, double logprob_ref);

}  // namespace aviator
