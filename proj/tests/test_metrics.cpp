#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "aviator/errors.hpp"
#include "aviator/metrics.hpp"
#include "aviator/simple_ast.hpp"

using namespace aviator;

namespace {

Token tok(TokenKind k, const std::string& text) {
    Token t;
    t.kind = k;
    t.text = text;
    return t;
}

std::vector<Token> idents(std::initializer_list<std::string> texts) {
    std::vector<Token> out;
    for (const auto& t : texts) out.push_back(tok(TokenKind::Identifier, t));
    return out;
}

// Independent brute-force BLEU oracle: n-gram lists compared pairwise, no
// shared code with the implementation.
double bleu_oracle(const std::vector<Token>& cand, const std::vector<Token>& ref, int max_n,
                   double kw_weight) {
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty()) return 0.0;
    auto grams = [](const std::vector<Token>& ts, int n) {
        std::vector<std::vector<std::pair<int, std::string>>> out;
        for (std::size_t s = 0; s + static_cast<std::size_t>(n) <= ts.size(); ++s) {
            std::vector<std::pair<int, std::string>> g;
            for (int k = 0; k < n; ++k) {
                const Token& t = ts[s + static_cast<std::size_t>(k)];
                g.emplace_back(static_cast<int>(t.kind), t.text);
            }
            out.push_back(std::move(g));
        }
        return out;
    };
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        auto cg = grams(cand, n);
        auto rg = grams(ref, n);
        double matched = 0.0, total = 0.0;
        std::vector<bool> used(rg.size(), false);
        for (const auto& g : cg) {
            double w = (g[0].first == static_cast<int>(TokenKind::Keyword)) ? kw_weight : 1.0;
            total += w;
            for (std::size_t r = 0; r < rg.size(); ++r) {
                if (!used[r] && rg[r] == g) {
                    used[r] = true;
                    matched += w;
                    break;
                }
            }
        }
        double p;
        if (n == 1) {
            if (matched == 0.0) return 0.0;
            p = matched / total;
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

// Exhaustive subset enumeration for pass@k: the first c of n samples are
// "correct"; count k-subsets hitting at least one.
double pass_at_k_oracle(int n, int c, int k) {
    long long total = 0, hit = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++total;
        if (mask & ((1u << c) - 1u)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("pass_at_k: named values") {
    CHECK(pass_at_k(10, 0, 5) == 0.0);
    CHECK(pass_at_k(10, 10, 1) == 1.0);
    CHECK(pass_at_k(5, 2, 2) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("pass_at_k: exhaustive oracle for n <= 8") {
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                double expect = pass_at_k_oracle(n, c, k);
                double got = pass_at_k(n, c, k);
                CHECK(std::fabs(got - expect) <= 1e-12);
            }
        }
    }
}

TEST_CASE("pass_at_k: monotone in k; equals 1 iff c > n-k or k == n with c >= 1") {
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            double prev = 0.0;
            for (int k = 1; k <= n; ++k) {
                double v = pass_at_k(n, c, k);
                CHECK(v >= prev - 1e-15);
                prev = v;
                bool should_be_one = c > n - k || (c >= 1 && k == n);
                CHECK((v == 1.0) == should_be_one);
            }
        }
    }
}

TEST_CASE("pass_at_k: domain violations") {
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 0, 0), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 0, 6), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, -1, 1), DomainError);
}

TEST_CASE("aisr: examples and properties") {
    MeanStd single = aisr({{0.9}});
    CHECK(single.mean == doctest::Approx(0.9));
    CHECK(single.std == 0.0);

    MeanStd three = aisr({{0.8, 1.0, 0.9}});
    CHECK(three.mean == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(three.std == doctest::Approx(std::sqrt(0.02 / 3.0)).epsilon(1e-9));
    CHECK(three.std == doctest::Approx(0.0816497).epsilon(1e-5));

    MeanStd equal = aisr({{0.5, 0.5, 0.5, 0.5}});
    CHECK(equal.std == 0.0);

    CHECK_THROWS_AS(aisr({{}}), DomainError);

    // translation equivariance of the mean, invariance of the std
    RunStats base{{0.1, 0.3, 0.2}};
    RunStats shifted{{0.4, 0.6, 0.5}};
    MeanStd b = aisr(base), s = aisr(shifted);
    CHECK(s.mean == doctest::Approx(b.mean + 0.3).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(b.std).epsilon(1e-12));
    // scale equivariance
    RunStats scaled{{0.2, 0.6, 0.4}};
    MeanStd sc = aisr(scaled);
    CHECK(sc.mean == doctest::Approx(2 * b.mean).epsilon(1e-12));
    CHECK(sc.std == doctest::Approx(2 * b.std).epsilon(1e-12));
}

TEST_CASE("sft_nll") {
    CHECK(sft_nll({0.0, 0.0, 0.0}) == 0.0);
    CHECK(sft_nll({std::log(0.5), std::log(0.5)}) == doctest::Approx(1.3862944).epsilon(1e-6));
    CHECK(sft_nll({}) == 0.0);
    CHECK_THROWS_AS(sft_nll({0.1}), DomainError);
}

TEST_CASE("grpo_advantages") {
    auto adv = grpo_advantages({1.0, 2.0, 3.0});
    REQUIRE(adv.size() == 3);
    CHECK(adv[0] == doctest::Approx(-1.2247449).epsilon(1e-6));
    CHECK(adv[1] == doctest::Approx(0.0));
    CHECK(adv[2] == doctest::Approx(1.2247449).epsilon(1e-6));

    auto zeros = grpo_advantages({5.0, 5.0, 5.0, 5.0});
    for (double a : zeros) CHECK(a == 0.0);

    CHECK_THROWS_AS(grpo_advantages({1.0}), DomainError);

    // normalized output: mean 0 and population std 1 when input std > 0
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> val(-3, 3);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<double> rewards;
        for (int i = 0; i < 6; ++i) rewards.push_back(val(rng));
        auto a = grpo_advantages(rewards);
        double mean = 0;
        for (double x : a) mean += x;
        mean /= static_cast<double>(a.size());
        CHECK(std::fabs(mean) < 1e-9);
        double var = 0;
        for (double x : a) var += (x - mean) * (x - mean);
        var /= static_cast<double>(a.size());
        CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("kl_penalty") {
    CHECK(kl_penalty(-1.5, -1.5) == 0.0);
    CHECK(kl_penalty(-2.0 - std::log(2.0), -2.0) ==
          doctest::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-9));
    CHECK(kl_penalty(-1.0, -1.0 + std::log(2.0)) == doctest::Approx(0.3068528).epsilon(1e-6));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> lp(-8.0, 0.0);
    for (int i = 0; i < 50; ++i) {
        double a = lp(rng), b = lp(rng);
        CHECK(kl_penalty(a, b) >= 0.0);
    }
}

TEST_CASE("grpo_objective: unit ratios and zero beta give zero") {
    CandidateGroup g;
    g.rewards = {1.0, 2.0, 3.0, 4.0};
    g.logprob_new = {-1, -2, -3, -4};
    g.logprob_old = {-1, -2, -3, -4};
    g.logprob_ref = {-1, -2, -3, -4};
    CHECK(std::fabs(grpo_objective(g, 0.2, 0.0)) <= 1e-12);
}

TEST_CASE("grpo_objective: clipping arithmetic") {
    // candidate 0: ratio 2.0 and positive advantage -> clipped to 1.2 * a
    CandidateGroup g;
    g.rewards = {2.0, 0.0};  // advantages {+1, -1}
    g.logprob_new = {-1.0 + std::log(2.0), -1.0};
    g.logprob_old = {-1.0, -1.0};
    g.logprob_ref = g.logprob_new;
    double expect = (1.2 * 1.0 + std::min(1.0 * -1.0, 1.0 * -1.0)) / 2.0;
    CHECK(grpo_objective(g, 0.2, 0.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("grpo_objective: dual-implementation oracle on a fixture group") {
    CandidateGroup g;
    g.prompt_id = "fixture";
    g.rewards = {0.61, 0.42, 0.87, 0.55};
    g.logprob_new = {-10.2, -11.7, -9.4, -12.1};
    g.logprob_old = {-10.5, -11.2, -9.9, -12.0};
    g.logprob_ref = {-10.0, -11.9, -9.5, -12.4};
    double eps = 0.2, beta = 0.04;

    // straight-line re-implementation
    double mu = (0.61 + 0.42 + 0.87 + 0.55) / 4.0;
    double var = 0.0;
    for (double r : g.rewards) var += (r - mu) * (r - mu);
    double sigma = std::sqrt(var / 4.0);
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        double a = (g.rewards[static_cast<std::size_t>(i)] - mu) / sigma;
        double ratio = std::exp(g.logprob_new[static_cast<std::size_t>(i)] -
                                g.logprob_old[static_cast<std::size_t>(i)]);
        double clipped = ratio;
        if (clipped < 1.0 - eps) clipped = 1.0 - eps;
        if (clipped > 1.0 + eps) clipped = 1.0 + eps;
        double surrogate = std::min(ratio * a, clipped * a);
        double d = g.logprob_ref[static_cast<std::size_t>(i)] -
                   g.logprob_new[static_cast<std::size_t>(i)];
        double kl = std::exp(d) - d - 1.0;
        total += surrogate - beta * kl;
    }
    double expect = total / 4.0;
    CHECK(grpo_objective(g, eps, beta) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("grpo_objective: errors") {
    CandidateGroup g;
    g.rewards = {1.0, 2.0};
    g.logprob_new = {-1, -2};
    g.logprob_old = {-1, -2};
    g.logprob_ref = {-1, -2};
    CHECK_THROWS_AS(grpo_objective(g, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(grpo_objective(g, 0.2, -0.1), DomainError);
    g.logprob_new = {5000.0, -2};  // overflows the ratio
    CHECK_THROWS_AS(grpo_objective(g, 0.2, 0.0), DomainError);
}

TEST_CASE("ngram_bleu: trivial cases and oracle values") {
    auto same = idents({"a", "b", "c"});
    CHECK(ngram_bleu(same, same) == 1.0);
    CHECK(ngram_bleu({}, same) == 0.0);
    CHECK(ngram_bleu({}, {}) == 1.0);

    auto cand = idents({"a", "b", "c"});
    auto ref = idents({"a", "b", "d"});
    double got = ngram_bleu(cand, ref);
    CHECK(got == doctest::Approx(bleu_oracle(cand, ref, 4, 1.0)).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.686589).epsilon(1e-5));

    std::mt19937 rng(17);
    std::uniform_int_distribution<int> len(0, 10);
    std::uniform_int_distribution<int> pick(0, 3);
    const char* words[] = {"a", "b", "c", "d"};
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Token> c2, r2;
        int ln = len(rng);
        for (int i = 0; i < ln; ++i) c2.push_back(tok(TokenKind::Identifier, words[pick(rng)]));
        ln = len(rng);
        for (int i = 0; i < ln; ++i) r2.push_back(tok(TokenKind::Identifier, words[pick(rng)]));
        CHECK(ngram_bleu(c2, r2) ==
              doctest::Approx(bleu_oracle(c2, r2, 4, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("weighted_ngram_bleu") {
    auto same = idents({"x", "y"});
    CHECK(weighted_ngram_bleu(same, same) == 1.0);

    // no keywords present: equals plain ngram_bleu exactly
    auto cand = idents({"a", "b", "c"});
    auto ref = idents({"a", "b", "d"});
    CHECK(weighted_ngram_bleu(cand, ref, 5.0) == ngram_bleu(cand, ref));

    // a keyword-head mismatch is penalized more than an identifier mismatch
    std::vector<Token> ref2 = {tok(TokenKind::Keyword, "return"),
                               tok(TokenKind::Identifier, "x"),
                               tok(TokenKind::Identifier, "y")};
    std::vector<Token> kw_miss = {tok(TokenKind::Keyword, "break"),
                                  tok(TokenKind::Identifier, "x"),
                                  tok(TokenKind::Identifier, "y")};
    std::vector<Token> id_miss = {tok(TokenKind::Keyword, "return"),
                                  tok(TokenKind::Identifier, "z"),
                                  tok(TokenKind::Identifier, "y")};
    CHECK(weighted_ngram_bleu(kw_miss, ref2, 5.0) < weighted_ngram_bleu(id_miss, ref2, 5.0));
    CHECK(weighted_ngram_bleu(kw_miss, ref2, 5.0) ==
          doctest::Approx(bleu_oracle(kw_miss, ref2, 4, 5.0)).epsilon(1e-12));

    CHECK_THROWS_AS(weighted_ngram_bleu(cand, ref, 0.5), DomainError);
}

TEST_CASE("ast_match: identity, empty, and hand-enumerated fraction") {
    CHECK(ast_match_score("int f(){return 1;}", "int f(){return 1;}") == 1.0);
    CHECK(ast_match_score("", "int f(){return 1;}") == 0.0);

    // reference "x = y + 1;" has exactly 4 subtrees of height >= 2:
    //   bin:+(id lit), assign:=(id bin), stmt(assign), unit(stmt)
    ast::ParseResult ref = ast::parse_code("x = y + 1;");
    auto ms = ast::subtree_multiset(ref.root);
    int total = 0;
    for (auto& [k, v] : ms) total += v;
    REQUIRE(total == 4);

    // candidate keeps the first three and changes the unit
    double got = ast_match_score("x = y + 1; z;", "x = y + 1;");
    CHECK(got == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("ast_match: unparseable input falls back to token level") {
    bool fallback = false;
    double v = ast_match_score("}}}}", "int f(){return 1;}", Dialect::Cpp, &fallback);
    CHECK(fallback);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("dataflow_match: identity, removed edge, vacuous") {
    std::string ref = "int a = x; int b = a; return b;";
    CHECK(dataflow_match_score(ref, ref) == 1.0);

    // reference edges: a@0 (use in "int b = a") and b@0 (use in return);
    // dropping the b use leaves 1 of 2
    ast::ParseResult rp = ast::parse_code(ref);
    auto edges = ast::def_use_edges(rp.root);
    int total = 0;
    for (auto& [k, v] : edges) total += v;
    REQUIRE(total == 2);
    double got = dataflow_match_score("int a = x; int b = a; return 0;", ref);
    CHECK(got == doctest::Approx(0.5).epsilon(1e-12));

    // no variables in the reference: vacuous 1
    CHECK(dataflow_match_score("return 1;", "return 0;") == 1.0);
}

TEST_CASE("codebleu: every component stays in [0, 1]") {
    std::mt19937 rng(5);
    std::vector<std::string> snippets = {
        "",
        "int f() { return 0; }",
        "void g(int* p, int n) { for (int i = 0; i < n; i++) p[i] = i; }",
        "}}}}",
        "x = y; y = z; z = x;",
        "#define A 1\nint h() { return A; }",
    };
    std::uniform_int_distribution<std::size_t> pick(0, snippets.size() - 1);
    for (int i = 0; i < 40; ++i) {
        ScoreBreakdown s = codebleu(snippets[pick(rng)], snippets[pick(rng)]);
        for (double v : {s.bleu, s.weighted_bleu, s.ast_match, s.dataflow_match, s.composite}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("codebleu: identity, defaults, ordering") {
    CodeBleuWeights w;
    CHECK(w.alpha == 0.25);
    CHECK(w.beta == 0.25);
    CHECK(w.gamma == 0.25);
    CHECK(w.delta == 0.25);

    std::string fn = "int sum(int* v, int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) s += v[i];\n  return s;\n}\n";
    ScoreBreakdown identity = codebleu(fn, fn);
    CHECK(identity.composite == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(identity.bleu == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(identity.weighted_bleu == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(identity.ast_match == 1.0);
    CHECK(identity.dataflow_match == 1.0);

    std::string renamed = "int sum(int* v, int n) {\n  int t = 0;\n  for (int i = 0; i < n; i++) t += v[i];\n  return t;\n}\n";
    std::string unrelated = "void log_msg(const char* m) {\n  printf(\"%s\", m);\n}\n";
    ScoreBreakdown near = codebleu(renamed, fn);
    ScoreBreakdown far = codebleu(unrelated, fn);
    CHECK(near.composite < 1.0);
    CHECK(near.composite > far.composite);

    // composite is the weighted sum of the four components
    CHECK(near.composite ==
          doctest::Approx(0.25 * near.bleu + 0.25 * near.weighted_bleu + 0.25 * near.ast_match +
                          0.25 * near.dataflow_match)
              .epsilon(1e-12));

    CodeBleuWeights bad{0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(codebleu(fn, fn, bad), DomainError);

    CodeBleuWeights skewed{0.7, 0.1, 0.1, 0.1};
    CHECK(codebleu(fn, fn, skewed).composite == doctest::Approx(1.0).epsilon(1e-9));
}
