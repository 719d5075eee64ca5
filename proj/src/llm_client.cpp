#include "semchain/llm_client.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string prompt_hash(const ChatRequest& request) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : request.messages) {
        h = fnv1a(m.role, h);
        h = fnv1a(":", h);
        h = fnv1a(m.content, h);
        h = fnv1a("\n", h);
    }
    return fmt::format("{:016x}", h);
}

std::string prompt_hash(std::string_view user_prompt) {
    ChatRequest r;
    r.messages.push_back({"user", std::string(user_prompt)});
    return prompt_hash(r);
}

std::vector<FixtureEntry> parse_fixtures(const json& j) {
    if (!j.is_array()) throw ProviderError("fixture file must be a JSON list");
    std::vector<FixtureEntry> out;
    for (const auto& e : j) {
        out.push_back({e.at("prompt_hash").get<std::string>(), e.at("response").get<std::string>()});
    }
    return out;
}

json fixtures_json(const std::vector<FixtureEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back({{"prompt_hash", e.prompt_hash}, {"response", e.response}});
    return out;
}

FixtureChatClient::FixtureChatClient(std::vector<FixtureEntry> entries) {
    for (auto& e : entries) responses_[e.prompt_hash].push_back(std::move(e.response));
}

std::vector<FixtureEntry> load_fixtures(const std::filesystem::path& path) {
    try {
        return parse_fixtures(json::parse(read_file(path)));
    } catch (const IoError& e) {
        throw ProviderError(e.what());
    } catch (const json::exception& e) {
        throw ProviderError(fmt::format("fixture '{}': {}", path.string(), e.what()));
    }
}

std::string FixtureChatClient::complete(const ChatRequest& request) {
    const auto hash = prompt_hash(request);
    std::lock_guard lock(mutex_);
    const auto it = responses_.find(hash);
    if (it == responses_.end()) throw ProviderError(fmt::format("no fixture for prompt hash {}", hash));
    auto& pos = cursor_[hash];
    const auto& list = it->second;
    const auto& response = list[std::min(pos, list.size() - 1)];
    ++pos;
    return response;
}

std::string RecordingChatClient::complete(const ChatRequest& request) {
    auto response = inner_.complete(request);
    std::lock_guard lock(mutex_);
    entries_.push_back({prompt_hash(request), response});
    return response;
}

std::vector<FixtureEntry> RecordingChatClient::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

ThrottledChatClient::ThrottledChatClient(std::shared_ptr<ChatClient> inner, std::ptrdiff_t max_in_flight,
                                         std::chrono::milliseconds min_interval)
    : inner_(std::move(inner)), slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)), min_interval_(min_interval) {}

std::string ThrottledChatClient::complete(const ChatRequest& request) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};

    if (min_interval_.count() > 0) {
        std::chrono::steady_clock::time_point start;
        {
            std::lock_guard lock(pace_mutex_);
            start = std::max(std::chrono::steady_clock::now(), next_start_);
            next_start_ = start + min_interval_;
        }
        std::this_thread::sleep_until(start);
    }
    return inner_->complete(request);
}

OpenAiCompatibleClient::OpenAiCompatibleClient(OpenAiCompatibleOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) throw ProviderError("provider base_url is empty");
}

std::string OpenAiCompatibleClient::complete(const ChatRequest& request) {
    json body{{"model", request.model}, {"temperature", request.temperature}, {"messages", json::array()}};
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, options_.max_attempts); ++attempt) {
        const auto res = client.Post(options_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
        } else if (res->status != 200) {
            throw ProviderError(fmt::format("provider returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
        } else {
            try {
                const auto reply = json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw ProviderError(fmt::format("unexpected provider response: {}", e.what()));
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(250 << attempt));
    }
    throw ProviderError(fmt::format("provider unreachable after retries: {}", last_error));
}

std::shared_ptr<ChatClient> make_chat_client(const json& provider, const std::filesystem::path& base_dir) {
    const auto kind = provider.value("kind", std::string("fixture"));
    std::shared_ptr<ChatClient> client;
    if (kind == "fixture") {
        std::filesystem::path path = provider.at("path").get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        client = std::make_shared<FixtureChatClient>(load_fixtures(path));
    } else if (kind == "openai") {
        OpenAiCompatibleOptions options;
        options.base_url = provider.at("base_url").get<std::string>();
        options.path = provider.value("path", options.path);
        options.timeout = std::chrono::seconds(provider.value("timeout_s", 60));
        const auto env = provider.value("api_key_env", std::string("OPENAI_API_KEY"));
        if (const char* key = std::getenv(env.c_str())) {
            options.api_key = key;
        } else {
            throw ProviderError(fmt::format("environment variable {} is not set", env));
        }
        client = std::make_shared<OpenAiCompatibleClient>(std::move(options));
    } else {
        throw ProviderError(fmt::format("unknown provider kind '{}'", kind));
    }
    const auto cap = provider.value("max_in_flight", 4);
    const auto interval = std::chrono::milliseconds(provider.value("min_interval_ms", 0));
    return std::make_shared<ThrottledChatClient>(std::move(client), cap, interval);
}

}  // namespace semchain
