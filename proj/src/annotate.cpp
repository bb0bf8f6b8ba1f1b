#include "memestat/annotate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

namespace memestat {

namespace {

using nlohmann::json;

constexpr std::string_view kAnnotationInstructions =
    "For each line of text below, separated by —, specify sentiment towards the stock as positive, neutral, or "
    "negative. The context is meme stocks. Respond with sentiment for each text in a separate line, with "
    "corresponding id. Don’t add any decorators, just lowercase response in one word. Make sure to give the "
    "response for each id. Here are the texts:";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

bool is_separator(std::string_view line) {
    return trim(line) == kPromptSeparator;
}

// A line that reads as a separator once leading backslashes are removed.
bool is_escaped_separator_form(std::string_view line) {
    auto t = trim(line);
    while (!t.empty() && t.front() == '\\') t.remove_prefix(1);
    return t == kPromptSeparator;
}

std::string escape_body(std::string_view text) {
    std::string out;
    bool first = true;
    for (auto line : split_lines(text)) {
        if (!first) out.push_back('\n');
        first = false;
        if (is_escaped_separator_form(line)) {
            const auto lead = line.find_first_not_of(" \t\r");
            out.append(line.substr(0, lead));
            out.push_back('\\');
            out.append(line.substr(lead));
        } else {
            out.append(line);
        }
    }
    return out;
}

std::string unescape_line(std::string_view line) {
    if (trim(line) != kPromptSeparator && is_escaped_separator_form(line)) {
        const auto slash = line.find('\\');
        std::string out(line.substr(0, slash));
        out.append(line.substr(slash + 1));
        return out;
    }
    return std::string(line);
}

void check_batch(const std::vector<BatchItem>& batch, const char* what) {
    if (batch.empty()) throw Error(std::string(what) + ": empty batch");
    if (batch.size() > kMaxBatchSize) throw Error(std::string(what) + ": batch exceeds 100 items");
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].id != i + 1) throw Error(std::string(what) + ": ids must run 1..n");
    }
}

void append_entries(std::string& out, const std::vector<BatchItem>& batch) {
    out.append(kPromptSeparator);
    out.push_back('\n');
    for (const auto& item : batch) {
        out += std::to_string(item.id);
        out += ": ";
        out += escape_body(item.text);
        out.push_back('\n');
        out.append(kPromptSeparator);
        out.push_back('\n');
    }
}

std::optional<std::size_t> parse_id(std::string_view digits) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return v;
}

}  // namespace

std::vector<BatchItem> number_batch(const std::vector<std::string>& texts) {
    std::vector<BatchItem> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({i + 1, texts[i]});
    return out;
}

std::string build_annotation_prompt(const std::vector<BatchItem>& batch) {
    check_batch(batch, "annotation prompt");
    std::string out(kAnnotationInstructions);
    out.push_back('\n');
    append_entries(out, batch);
    return out;
}

std::vector<BatchItem> parse_prompt_entries(std::string_view prompt) {
    const auto lines = split_lines(prompt);
    std::size_t i = 0;
    while (i < lines.size() && !is_separator(lines[i])) ++i;

    static const std::regex head(R"(^(\d+): ([\s\S]*)$)");
    std::vector<BatchItem> out;
    while (i < lines.size()) {
        ++i;  // past separator
        std::size_t end = i;
        while (end < lines.size() && !is_separator(lines[end])) ++end;
        if (end == lines.size()) break;  // no closing separator
        if (end > i) {
            const std::string first(lines[i]);
            std::smatch m;
            if (std::regex_match(first, m, head)) {
                if (const auto id = parse_id(m[1].str())) {
                    std::string text = unescape_line(m[2].str());
                    for (std::size_t k = i + 1; k < end; ++k) {
                        text.push_back('\n');
                        text += unescape_line(lines[k]);
                    }
                    out.push_back({*id, std::move(text)});
                }
            }
        }
        i = end;
    }
    return out;
}

ParsedAnnotation parse_annotation_response(std::string_view text, const std::set<std::size_t>& expected_ids) {
    static const std::regex whole_line(R"(^(\s*\d+\s*:\s*[A-Za-z]+[.!,;]*\s*)+$)");
    static const std::regex pair(R"((\d+)\s*:\s*([A-Za-z]+))");

    ParsedAnnotation out;
    for (auto raw : split_lines(text)) {
        const std::string line(trim(raw));
        if (line.empty() || !std::regex_match(line, whole_line)) continue;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), pair); it != std::sregex_iterator(); ++it) {
            const auto id = parse_id((*it)[1].str());
            const auto label = parse_label((*it)[2].str());
            if (!id || !label || !expected_ids.contains(*id)) continue;
            out.labels.emplace(*id, *label);
        }
    }
    for (std::size_t id : expected_ids) {
        if (!out.labels.contains(id)) out.missing.insert(id);
    }
    return out;
}

std::string build_augmentation_prompt(const std::vector<BatchItem>& seeds, std::size_t requested) {
    check_batch(seeds, "augmentation prompt");
    if (requested == 0) throw Error("augmentation prompt: requested count must be positive");
    std::string out =
        "Here are comments about Gamestock squeeze and meme stocks (stonks).\n"
        "All of them were marked as negative.\n"
        "Each one is divided with —.\n"
        "Learn the style of these comments. Look at emojis.\n"
        "Respond with " +
        std::to_string(requested) +
        " new comments, also negative, in the same style. Separate each generated comment with — and give it an "
        "index number starting from 1.\n"
        "Here are the texts:\n";
    append_entries(out, seeds);
    return out;
}

std::vector<std::string> parse_augmentation_response(std::string_view text) {
    static const std::regex entry(R"(^(\d+)\s*:\s*(.*\S)\s*$)");
    std::map<std::size_t, std::string> by_index;
    for (auto raw : split_lines(text)) {
        const std::string line(trim(raw));
        std::smatch m;
        if (!std::regex_match(line, m, entry)) continue;
        const auto idx = parse_id(m[1].str());
        if (!idx) continue;
        by_index.emplace(*idx, m[2].str());
    }
    std::vector<std::string> out;
    out.reserve(by_index.size());
    for (auto& [idx, comment] : by_index) out.push_back(std::move(comment));
    return out;
}

// ---------------------------------------------------------------------------

void ClientConfig::validate() const {
    if (max_in_flight < 1) throw Error("client config: max_in_flight must be >= 1");
    if (base_url.empty()) throw Error("client config: base_url is empty");
    if (model.empty()) throw Error("client config: model is empty");
}

std::string build_chat_request(const std::string& model, const std::string& prompt) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string parse_chat_response(std::string_view body) {
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw TransportError("chat response is not JSON");
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("chat response lacks choices[0].message.content");
    }
}

TranscriptLog::TranscriptLog(const std::string& path, bool redact) : path_(path), redact_(redact) {
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error("cannot open transcript " + path_);
}

void TranscriptLog::record(const std::string& request_body, const std::string& response_text,
                           std::string_view status) {
    nlohmann::ordered_json line;
    json request = json::parse(request_body, nullptr, false);
    if (request.is_discarded()) request = request_body;
    if (redact_) {
        if (request.is_object() && request.contains("messages")) {
            for (auto& m : request["messages"]) {
                const auto n = m.value("content", std::string()).size();
                m["content"] = "[redacted " + std::to_string(n) + " bytes]";
            }
        }
        line["request"] = request;
        line["response"] = "[redacted " + std::to_string(response_text.size()) + " bytes]";
    } else {
        line["request"] = request;
        line["response"] = response_text;
    }
    line["status"] = status;
    const auto text = line.dump(-1, ' ', false, json::error_handler_t::replace);
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << text << '\n';
}

HttpChatClient::HttpChatClient(ClientConfig config, std::shared_ptr<TranscriptLog> transcript)
    : config_(std::move(config)), transcript_(std::move(transcript)) {
    config_.validate();
    if (const char* tok = std::getenv(config_.token_env.c_str()); tok && *tok) token_ = tok;
}

std::string HttpChatClient::complete(const std::string& prompt) {
    const std::string body = build_chat_request(config_.model, prompt);
    auto log = [&](const std::string& response, std::string_view status) {
        if (transcript_) transcript_->record(body, response, status);
    };

    httplib::Client client(config_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);

    const auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
        const std::string why = "transport error: " + httplib::to_string(res.error());
        log("", why);
        throw TransportError(why);
    }
    if (res->status != 200) {
        const std::string why = "HTTP " + std::to_string(res->status);
        log(res->body, why);
        throw TransportError(why);
    }
    std::string text;
    try {
        text = parse_chat_response(res->body);
    } catch (const TransportError& e) {
        log(res->body, e.what());
        throw;
    }
    log(text, "ok");
    return text;
}

ReplayChatClient::ReplayChatClient(const std::string& transcript_path) {
    std::ifstream in(transcript_path);
    if (!in) throw InputError("cannot read transcript " + transcript_path);
    std::string line;
    while (std::getline(in, line)) {
        const json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || doc.value("status", "") != "ok") continue;
        try {
            const auto prompt = doc.at("request").at("messages").at(0).at("content").get<std::string>();
            answers_.emplace(prompt, doc.at("response").get<std::string>());
        } catch (const json::exception&) {
            continue;
        }
    }
}

std::string ReplayChatClient::complete(const std::string& prompt) {
    const auto it = answers_.find(prompt);
    if (it == answers_.end()) throw TransportError("no recorded answer for prompt");
    return it->second;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::size_t, std::size_t>> partition_batches(std::size_t count, std::size_t batch_size) {
    if (batch_size == 0) throw Error("batch size must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t begin = 0; begin < count; begin += batch_size) {
        out.emplace_back(begin, std::min(count, begin + batch_size));
    }
    return out;
}

namespace {

struct BatchOutcome {
    std::vector<std::pair<std::size_t, SentimentLabel>> labels;  // (post index, label)
    std::vector<std::size_t> rejects;
    std::size_t requests = 0;
    std::size_t transport_failures = 0;
};

void backoff(const ClientConfig& config, std::size_t failures) {
    if (config.backoff_base.count() <= 0) return;
    const auto shift = std::min<std::size_t>(failures - 1, 10);
    std::this_thread::sleep_for(config.backoff_base * (std::int64_t{1} << shift));
}

BatchOutcome annotate_batch(const std::vector<Post>& posts, std::size_t begin, std::size_t end, ChatClient& client,
                            const ClientConfig& config) {
    BatchOutcome out;
    std::vector<std::size_t> pending(end - begin);
    for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = begin + i;

    std::size_t consecutive_failures = 0;
    for (std::size_t attempt = 0; attempt <= config.retry_limit && !pending.empty(); ++attempt) {
        std::vector<BatchItem> items;
        std::set<std::size_t> expected;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            items.push_back({i + 1, posts[pending[i]].text});
            expected.insert(i + 1);
        }
        ++out.requests;
        std::string answer;
        try {
            answer = client.complete(build_annotation_prompt(items));
        } catch (const TransportError&) {
            ++out.transport_failures;
            ++consecutive_failures;
            if (attempt < config.retry_limit) backoff(config, consecutive_failures);
            continue;
        }
        consecutive_failures = 0;
        const auto parsed = parse_annotation_response(answer, expected);
        std::vector<std::size_t> still_missing;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const auto it = parsed.labels.find(i + 1);
            if (it == parsed.labels.end()) {
                still_missing.push_back(pending[i]);
            } else {
                out.labels.emplace_back(pending[i], it->second);
            }
        }
        pending = std::move(still_missing);
    }
    out.rejects = std::move(pending);
    return out;
}

}  // namespace

AnnotationOutcome annotate_corpus(const std::vector<Post>& posts, ChatClient& client, const ClientConfig& config) {
    config.validate();
    const auto batches = partition_batches(posts.size());
    std::vector<BatchOutcome> results(batches.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t b = next.fetch_add(1);
            if (b >= batches.size()) return;
            try {
                results[b] = annotate_batch(posts, batches[b].first, batches[b].second, client, config);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = batches.size();
                return;
            }
        }
    };
    {
        const std::size_t n_workers = std::min(config.max_in_flight, std::max<std::size_t>(batches.size(), 1));
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<std::optional<SentimentLabel>> labels(posts.size());
    std::vector<bool> rejected(posts.size(), false);
    AnnotationOutcome outcome;
    for (const auto& r : results) {
        for (const auto& [idx, label] : r.labels) {
            if (!labels[idx]) labels[idx] = label;
        }
        for (std::size_t idx : r.rejects) rejected[idx] = true;
        outcome.requests += r.requests;
        outcome.transport_failures += r.transport_failures;
    }
    for (std::size_t i = 0; i < posts.size(); ++i) {
        if (labels[i]) {
            outcome.labels.push_back({posts[i].id, *labels[i]});
        } else {
            outcome.rejects.push_back(posts[i].id);
        }
    }
    return outcome;
}

AugmentationOutcome augment_corpus(const std::vector<std::string>& seeds, ChatClient& client,
                                   const ClientConfig& config, std::size_t requested) {
    config.validate();
    AugmentationOutcome outcome;
    for (const auto& [begin, end] : partition_batches(seeds.size())) {
        AugmentationBatch batch;
        batch.requested = requested;
        batch.seeds = number_batch({seeds.begin() + static_cast<std::ptrdiff_t>(begin),
                                    seeds.begin() + static_cast<std::ptrdiff_t>(end)});
        const auto prompt = build_augmentation_prompt(batch.seeds, requested);
        for (std::size_t attempt = 0; attempt <= config.retry_limit; ++attempt) {
            try {
                batch.generated = parse_augmentation_response(client.complete(prompt));
                break;
            } catch (const TransportError&) {
                if (attempt < config.retry_limit) backoff(config, attempt + 1);
            }
        }
        if (batch.generated.size() < requested) outcome.shortfall += requested - batch.generated.size();
        outcome.batches.push_back(std::move(batch));
    }
    return outcome;
}

}  // namespace memestat
