#include "aviator/providers.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "aviator/digest.hpp"
#include "aviator/errors.hpp"

namespace aviator {

std::string prompt_digest(const std::vector<ChatMessage>& messages,
                          const GenerationParams& params) {
    std::uint64_t h = kFnvOffset;
    for (const ChatMessage& m : messages) {
        h = fnv1a64(m.role, h);
        h = fnv1a64("\x1e", h);
        h = fnv1a64(m.content, h);
        h = fnv1a64("\x1f", h);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "|t=%.6f|m=%d|s=", params.temperature, params.max_tokens);
    h = fnv1a64(buf, h);
    h = fnv1a64(params.seed ? std::to_string(*params.seed) : "none", h);
    return to_hex(h);
}

ReplayProvider::ReplayProvider(std::filesystem::path fixtures_dir, std::string model)
    : dir_(std::move(fixtures_dir)), model_(std::move(model)) {}

std::string ReplayProvider::generate(const std::vector<ChatMessage>& messages,
                                     const GenerationParams& params) {
    std::filesystem::path file = dir_ / (prompt_digest(messages, params) + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ProviderError("no recorded completion for prompt digest " +
                            prompt_digest(messages, params));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RecordingProvider::RecordingProvider(TextGenerationProvider& inner,
                                     std::filesystem::path fixtures_dir)
    : inner_(inner), dir_(std::move(fixtures_dir)) {
    std::filesystem::create_directories(dir_);
}

std::string RecordingProvider::generate(const std::vector<ChatMessage>& messages,
                                        const GenerationParams& params) {
    std::string completion = inner_.generate(messages, params);
    std::filesystem::path file = dir_ / (prompt_digest(messages, params) + ".txt");
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write fixture " + file.string());
    out << completion;
    return completion;
}

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("provider url must include a scheme: " + url);
    }
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/v1/chat/completions"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatProvider::HttpChatProvider(std::string url, std::string token, std::string model)
    : url_(std::move(url)), token_(std::move(token)), model_(std::move(model)) {
    if (url_.empty()) throw ConfigError("provider url is empty");
}

std::string HttpChatProvider::generate(const std::vector<ChatMessage>& messages,
                                       const GenerationParams& params) {
    ParsedUrl parsed = parse_url(url_);
    httplib::Client client(parsed.base);
    client.set_read_timeout(300, 0);
    client.set_connection_timeout(30, 0);

    nlohmann::ordered_json body;
    body["model"] = model_;
    nlohmann::ordered_json msgs = nlohmann::ordered_json::array();
    for (const ChatMessage& m : messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    if (params.seed) body["seed"] = *params.seed;

    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = client.Post(parsed.path, headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("request to " + url_ + " failed: " +
                            httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ProviderError("provider returned status " + std::to_string(res->status));
    }
    try {
        nlohmann::json reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what());
    }
}

std::unique_ptr<HttpChatProvider> make_http_provider_from_env(const std::string& model) {
    const char* url = std::getenv("AVIATOR_LLM_URL");
    if (!url || !*url) {
        throw ConfigError("AVIATOR_LLM_URL is not set");
    }
    const char* token = std::getenv("AVIATOR_LLM_TOKEN");
    return std::make_unique<HttpChatProvider>(url, token ? token : "", model);
}

}  // namespace aviator
