#pragma once

// JSON-RPC 2.0 engine behind `perflens-server`. ServerCore is transport-free
// and thread-safe; serve_stdio adds framing and a worker pool.
//
// Methods: perf/loadReport, perf/lenses, perf/hover, perf/detail,
// perf/overview, perf/analyze, perf/didSave (notification; publishes
// perf/staleness), plus initialize, shutdown and exit.

#include "perflens/config.hpp"
#include "perflens/history_store.hpp"
#include "perflens/report_ingest.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

namespace perflens::server {

namespace rpc_error {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kIoError = -32001;
inline constexpr int kFormatError = -32002;
inline constexpr int kNotFound = -32003;
inline constexpr int kAnalysisFailed = -32004;
}  // namespace rpc_error

class RpcError : public std::runtime_error {
public:
    RpcError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
    [[nodiscard]] int code() const noexcept { return code_; }

private:
    int code_;
};

using Publisher = std::function<void(const nlohmann::json& notification)>;

/// A didSave accepted in arrival order; run it later (possibly on another
/// thread). Superseded tickets publish nothing.
struct SaveTicket {
    std::string file;
    std::string old_content;
    std::string new_content;
    std::uint64_t generation = 0;
    bool seed_only = false;
};

class ServerCore {
public:
    ServerCore(std::filesystem::path root, Publisher publish);

    /// Response for requests, nullopt for notifications.
    std::optional<nlohmann::json> handle(const nlohmann::json& message);

    /// True for methods that change state and must run in arrival order.
    [[nodiscard]] static bool is_mutation(std::string_view method) noexcept;

    void set_publisher(Publisher publish);

    SaveTicket begin_save(const std::string& file, std::string new_content);
    void run_save(const SaveTicket& ticket);

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
    [[nodiscard]] bool exit_requested() const noexcept { return exit_requested_; }

    /// Root-relative, normalized form of a client path.
    [[nodiscard]] std::string relative(std::string_view path) const;

    /// Direct calls used by handle(); they throw RpcError.
    nlohmann::json load_report(const nlohmann::json& params);
    nlohmann::json lenses(const nlohmann::json& params);
    nlohmann::json hover(const nlohmann::json& params);
    nlohmann::json detail(const nlohmann::json& params);
    nlohmann::json overview(const nlohmann::json& params);
    nlohmann::json analyze(const nlohmann::json& params);

private:
    std::string current_content(const std::string& file) const;
    void record(const ingest::CostDatabase& db, const std::string& source);

    std::filesystem::path root_;
    Publisher publish_;
    std::mutex publish_mutex_;
    Config config_;

    mutable std::shared_mutex state_mutex_;
    ingest::CostDatabase db_;
    history::HistoryStore history_;

    mutable std::mutex save_mutex_;
    std::map<std::string, std::uint64_t> save_generation_;
    std::map<std::string, std::string> baseline_;  // content of the last completed assessment
    std::map<std::string, std::string> latest_;    // newest saved content

    std::mutex analyze_mutex_;

    std::atomic<bool> exit_requested_{false};
};

/// Reads messages (Content-Length framed or one JSON object per line) until
/// EOF or `exit`. Output uses the framing of the first message received.
/// Returns the process exit code.
int serve_stdio(ServerCore& core, std::istream& in, std::ostream& out, unsigned workers = 4);

nlohmann::json make_notification(const std::string& method, nlohmann::json params);

}  // namespace perflens::server
