#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace aviator {

struct ChatMessage {
    std::string role;  // "system" | "user"
    std::string content;
};

struct GenerationParams {
    double temperature = 0.2;
    int max_tokens = 2048;
    std::optional<std::uint64_t> seed;
};

class TextGenerationProvider {
public:
    virtual ~TextGenerationProvider() = default;
    virtual std::string generate(const std::vector<ChatMessage>& messages,
                                 const GenerationParams& params) = 0;
    virtual bool supports_seed() const { return false; }
    virtual std::string model_name() const = 0;
};

// Digest of (messages, params, seed); the key under which fixtures are
// recorded and replayed.
std::string prompt_digest(const std::vector<ChatMessage>& messages,
                          const GenerationParams& params);

// Replays completions from a directory of <digest>.txt fixtures. Identical
// inputs always produce the identical completion; unknown digests are a
// ProviderError.
class ReplayProvider final : public TextGenerationProvider {
public:
    explicit ReplayProvider(std::filesystem::path fixtures_dir, std::string model = "replay");
    std::string generate(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override;
    bool supports_seed() const override { return true; }
    std::string model_name() const override { return model_; }

private:
    std::filesystem::path dir_;
    std::string model_;
};

// Wraps another provider and records every completion as a replay fixture.
class RecordingProvider final : public TextGenerationProvider {
public:
    RecordingProvider(TextGenerationProvider& inner, std::filesystem::path fixtures_dir);
    std::string generate(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override;
    bool supports_seed() const override { return inner_.supports_seed(); }
    std::string model_name() const override { return inner_.model_name(); }

private:
    TextGenerationProvider& inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

// Chat-completion HTTP backend: POST {"model", "messages", "temperature",
// "max_tokens", "seed"?} and read choices[0].message.content.
class HttpChatProvider final : public TextGenerationProvider {
public:
    HttpChatProvider(std::string url, std::string token, std::string model);
    std::string generate(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) override;
    bool supports_seed() const override { return true; }
    std::string model_name() const override { return model_; }

private:
    std::string url_;
    std::string token_;
    std::string model_;
};

// Reads AVIATOR_LLM_URL and AVIATOR_LLM_TOKEN.
std::unique_ptr<HttpChatProvider> make_http_provider_from_env(const std::string& model);

}  // namespace aviator
