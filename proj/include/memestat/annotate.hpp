#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "memestat/error.hpp"
#include "memestat/ingest.hpp"
#include "memestat/sentiment.hpp"

namespace memestat {

inline constexpr std::size_t kMaxBatchSize = 100;
inline constexpr std::size_t kDefaultAugmentationCount = 50;

/// Separator placed on its own line between prompt entries (U+2014).
inline constexpr std::string_view kPromptSeparator = "—";

struct BatchItem {
    std::size_t id = 0;  // batch-local, 1..n
    std::string text;

    friend bool operator==(const BatchItem&, const BatchItem&) = default;
};

/// Numbers texts 1..n in order.
std::vector<BatchItem> number_batch(const std::vector<std::string>& texts);

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

struct AnnotationBatch {
    std::vector<BatchItem> posts;
    std::string prompt;
    std::map<std::size_t, SentimentLabel> responses;
    std::set<std::size_t> missing;
};

/// Renders the sentiment-annotation prompt. Requires 1..100 items with ids 1..n.
std::string build_annotation_prompt(const std::vector<BatchItem>& batch);

struct ParsedAnnotation {
    std::map<std::size_t, SentimentLabel> labels;
    std::set<std::size_t> missing;
};

/// Accepts lines of `<id>: <label>` (several pairs may share a line). Labels are
/// case-insensitive with trailing punctuation tolerated; other lines are
/// skipped, unexpected ids ignored and the first answer for an id wins.
ParsedAnnotation parse_annotation_response(std::string_view text, const std::set<std::size_t>& expected_ids);

/// Recovers the id -> text entries from a rendered annotation or augmentation prompt.
std::vector<BatchItem> parse_prompt_entries(std::string_view prompt);

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct AugmentationBatch {
    std::vector<BatchItem> seeds;
    std::size_t requested = kDefaultAugmentationCount;
    std::vector<std::string> generated;
};

/// Renders the negative-sample generation prompt. Requires 1..100 seeds.
std::string build_augmentation_prompt(const std::vector<BatchItem>& seeds,
                                      std::size_t requested = kDefaultAugmentationCount);

/// Extracts `<index>: <comment>` lines ordered by index; separator lines and
/// anything else are ignored, and the first comment for an index wins.
std::vector<std::string> parse_augmentation_response(std::string_view text);

// ---------------------------------------------------------------------------
// Chat clients
// ---------------------------------------------------------------------------

/// Network or protocol failure talking to a chat-completion endpoint. Retried.
class TransportError : public Error {
public:
    using Error::Error;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Sends one user message and returns the assistant text. Must be thread-safe.
    virtual std::string complete(const std::string& prompt) = 0;
};

struct ClientConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    std::string token_env = "OPENAI_API_KEY";
    std::size_t max_in_flight = 4;
    std::size_t retry_limit = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds backoff_base{500};

    void validate() const;
};

/// JSON body {model, messages: [{role: "user", content: prompt}]}.
std::string build_chat_request(const std::string& model, const std::string& prompt);
/// Assistant text from choices[0].message.content. Throws TransportError otherwise.
std::string parse_chat_response(std::string_view body);

/// Appends request/response pairs to a JSONL file. Thread-safe.
class TranscriptLog {
public:
    TranscriptLog(const std::string& path, bool redact);
    void record(const std::string& request_body, const std::string& response_text, std::string_view status);

private:
    std::mutex mutex_;
    std::string path_;
    bool redact_;
};

/// HTTP(S) chat-completion client. The bearer token is read from
/// `config.token_env` at construction; an unset variable sends no token.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ClientConfig config, std::shared_ptr<TranscriptLog> transcript = nullptr);
    std::string complete(const std::string& prompt) override;

private:
    ClientConfig config_;
    std::optional<std::string> token_;
    std::shared_ptr<TranscriptLog> transcript_;
};

/// Answers prompts from an unredacted transcript written by TranscriptLog.
class ReplayChatClient : public ChatClient {
public:
    explicit ReplayChatClient(const std::string& transcript_path);
    std::string complete(const std::string& prompt) override;

private:
    std::map<std::string, std::string> answers_;
};

// ---------------------------------------------------------------------------
// Corpus annotation
// ---------------------------------------------------------------------------

struct AnnotationOutcome {
    std::vector<LabelRecord> labels;  // input order
    std::vector<std::string> rejects;  // post ids never labeled, input order
    std::size_t requests = 0;
    std::size_t transport_failures = 0;
};

/// Index ranges [begin, end) of consecutive batches of at most `batch_size`.
std::vector<std::pair<std::size_t, std::size_t>> partition_batches(std::size_t count,
                                                                   std::size_t batch_size = kMaxBatchSize);

/// Labels every post through `client` in batches of up to 100, with at most
/// `config.max_in_flight` concurrent requests. Ids missing from an answer are
/// re-sent on their own as a fresh, renumbered batch; transport failures back
/// off exponentially. Each batch gets 1 + retry_limit requests in total; posts
/// still unlabeled afterwards are returned as rejects.
AnnotationOutcome annotate_corpus(const std::vector<Post>& posts, ChatClient& client, const ClientConfig& config);

struct AugmentationOutcome {
    std::vector<AugmentationBatch> batches;
    std::size_t shortfall = 0;  // requested minus generated, summed over batches
};

/// Sends seeds in batches of up to 100 and collects generated comments.
AugmentationOutcome augment_corpus(const std::vector<std::string>& seeds, ChatClient& client,
                                   const ClientConfig& config, std::size_t requested = kDefaultAugmentationCount);

}  // namespace memestat
