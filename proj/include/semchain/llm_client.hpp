#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace semchain {

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChatMessage {
    std::string role;  // "system", "user" or "assistant"
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
};

// One chat-completion call: messages in, assistant text out. Implementations
// throw ProviderError on transport or protocol failure.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Key used by fixture files: FNV-1a 64-bit over the concatenated message
// contents (role, ':', content, '\n' per message), as 16 lowercase hex digits.
std::string prompt_hash(const ChatRequest& request);
std::string prompt_hash(std::string_view user_prompt);

struct FixtureEntry {
    std::string prompt_hash;
    std::string response;
};

// Replays recorded responses. Several entries may share a hash; they are
// served in file order and the last one repeats. An unknown hash is a
// ProviderError.
class FixtureChatClient final : public ChatClient {
public:
    explicit FixtureChatClient(std::vector<FixtureEntry> entries);

    std::string complete(const ChatRequest& request) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> responses_;
    std::map<std::string, std::size_t> cursor_;
};

std::vector<FixtureEntry> parse_fixtures(const nlohmann::json& j);
std::vector<FixtureEntry> load_fixtures(const std::filesystem::path& path);
nlohmann::json fixtures_json(const std::vector<FixtureEntry>& entries);

// Passes calls through and keeps every (hash, response) pair so a live run
// can be frozen into a fixture file.
class RecordingChatClient final : public ChatClient {
public:
    explicit RecordingChatClient(ChatClient& inner) : inner_(inner) {}

    std::string complete(const ChatRequest& request) override;
    std::vector<FixtureEntry> entries() const;

private:
    ChatClient& inner_;
    mutable std::mutex mutex_;
    std::vector<FixtureEntry> entries_;
};

// Caps concurrent calls into `inner` and spaces calls at least
// `min_interval` apart.
class ThrottledChatClient final : public ChatClient {
public:
    ThrottledChatClient(std::shared_ptr<ChatClient> inner, std::ptrdiff_t max_in_flight,
                        std::chrono::milliseconds min_interval);

    std::string complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatClient> inner_;
    std::counting_semaphore<1024> slots_;
    std::mutex pace_mutex_;
    std::chrono::milliseconds min_interval_;
    std::chrono::steady_clock::time_point next_start_{};
};

struct OpenAiCompatibleOptions {
    std::string base_url;  // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string api_key;
    std::chrono::seconds timeout{60};
    int max_attempts = 3;
};

// POSTs {model, messages, temperature} and returns choices[0].message.content.
// Any provider exposing the OpenAI chat-completions shape works.
class OpenAiCompatibleClient final : public ChatClient {
public:
    explicit OpenAiCompatibleClient(OpenAiCompatibleOptions options);
    std::string complete(const ChatRequest& request) override;

private:
    OpenAiCompatibleOptions options_;
};

// Builds a client from a provider block:
//   {"kind": "fixture", "path": "..."}
//   {"kind": "openai", "base_url": "...", "api_key_env": "OPENAI_API_KEY",
//    "max_in_flight": 4, "min_interval_ms": 0}
// Paths are resolved against `base_dir`. Throws ProviderError.
std::shared_ptr<ChatClient> make_chat_client(const nlohmann::json& provider, const std::filesystem::path& base_dir);

}  // namespace semchain
