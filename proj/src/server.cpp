#include "perflens/server.hpp"

#include "perflens/lenses.hpp"
#include "perflens/microlang.hpp"
#include "perflens/paths.hpp"
#include "perflens/source_matcher.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace perflens::server {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void log_line(const std::string& msg) {
    static std::mutex m;
    const std::lock_guard lock(m);
    std::cerr << "perflens-server: " << msg << '\n';
}

const json& require(const json& params, const char* key) {
    if (!params.is_object() || !params.contains(key)) {
        throw RpcError(rpc_error::kInvalidParams, std::string("missing parameter '") + key + "'");
    }
    return params.at(key);
}

std::string require_string(const json& params, const char* key) {
    const json& v = require(params, key);
    if (!v.is_string()) throw RpcError(rpc_error::kInvalidParams, std::string("parameter '") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

}  // namespace

json make_notification(const std::string& method, json params) {
    return {{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}};
}

ServerCore::ServerCore(fs::path root, Publisher publish) : root_(std::move(root)), publish_(std::move(publish)) {
    Diagnostics diag;
    try {
        config_ = load_config(root_, diag);
    } catch (const Error& e) {
        log_line(std::string("config ignored: ") + e.what());
    }
    try {
        history_ = history::HistoryStore::open(root_, diag);
        history_.set_history_limit(config_.history_limit);
    } catch (const Error& e) {
        log_line(std::string("history unavailable: ") + e.what());
    }
    for (const auto& d : diag.items()) log_line(d.message);
}

void ServerCore::set_publisher(Publisher publish) {
    const std::lock_guard lock(publish_mutex_);
    publish_ = std::move(publish);
}

bool ServerCore::is_mutation(std::string_view method) noexcept {
    return method == "perf/loadReport" || method == "perf/analyze" || method == "shutdown" || method == "exit";
}

std::string ServerCore::relative(std::string_view path) const {
    const fs::path p{std::string(path)};
    if (p.is_absolute()) {
        const auto rel = p.lexically_normal().lexically_relative(root_.lexically_normal());
        if (!rel.empty() && *rel.begin() != "..") return normalize_path(rel.generic_string());
    }
    return normalize_path(p.generic_string());
}

std::string ServerCore::current_content(const std::string& file) const {
    {
        const std::lock_guard lock(save_mutex_);
        if (const auto it = latest_.find(file); it != latest_.end()) return it->second;
    }
    return read_text(root_ / file).value_or("");
}

void ServerCore::record(const ingest::CostDatabase& db, const std::string& source) {
    try {
        history_.record_database(db, source);
    } catch (const IoError& e) {
        log_line(std::string("history degraded: ") + e.what());
    }
}

json ServerCore::load_report(const json& params) {
    const auto start = std::chrono::steady_clock::now();
    const std::string path_param = require_string(params, "path");
    fs::path path{path_param};
    if (path.is_relative()) path = root_ / path;

    Diagnostics diag;
    ingest::CostDatabase db;
    try {
        db = ingest::load_report(path, diag);
    } catch (const IoError& e) {
        throw RpcError(rpc_error::kIoError, e.what());
    } catch (const FormatError& e) {
        throw RpcError(rpc_error::kFormatError, e.what());
    }
    for (const auto& d : diag.items()) log_line(d.message);

    const std::unique_lock lock(state_mutex_);
    db_ = std::move(db);
    record(db_, "report-load");
    return {{"procedures", db_.size()},
            {"files", db_.file_count()},
            {"warnings", diag.warning_count()},
            {"duration_ms", ms_since(start)}};
}

json ServerCore::lenses(const json& params) {
    const std::string file = relative(require_string(params, "file"));
    const auto index = source::index_source(file, current_content(file));
    const std::shared_lock lock(state_mutex_);
    json out = json::array();
    for (const auto& item : build_lenses(index, db_, &history_)) out.push_back(lens_to_json(item));
    return out;
}

json ServerCore::hover(const json& params) {
    const std::string file = relative(require_string(params, "file"));
    const json& line_v = require(params, "line");
    if (!line_v.is_number_integer()) throw RpcError(rpc_error::kInvalidParams, "parameter 'line' must be an integer");
    const int line = line_v.get<int>();
    const auto index = source::index_source(file, current_content(file));
    const std::shared_lock lock(state_mutex_);
    for (const auto& item : build_lenses(index, db_, &history_)) {
        if (!item.range.contains_line(line)) continue;
        return {{"fqn", item.fqn},
                {"exact_cost_text", item.exact_cost_text},
                {"big_o_text", item.big_o_text},
                {"severity", cost::severity_name(item.severity)}};
    }
    return nullptr;
}

json ServerCore::detail(const json& params) {
    const std::string fqn = require_string(params, "fqn");
    const std::shared_lock lock(state_mutex_);
    const ingest::CostReportEntry* e = db_.lookup(fqn);
    if (e == nullptr) {
        for (const auto& [key, entry] : db_.entries()) {
            if (ingest::base_fqn(key) != fqn) continue;
            if (e != nullptr) throw RpcError(rpc_error::kNotFound, "ambiguous fqn '" + fqn + "'");
            e = &entry;
        }
    }
    if (e == nullptr) throw RpcError(rpc_error::kNotFound, "unknown fqn '" + fqn + "'");

    json trace = json::array();
    for (const auto& t : e->trace) trace.push_back(trace_to_json(t));
    json hist = json::array();
    for (const auto& [run_id, c] : history_.history(e->fqn).steps) {
        hist.push_back({{"run_id", run_id}, {"big_o_text", cost::big_o_text(c)}, {"exact_cost_text", c.render()}});
    }
    json predicted = json::array();
    if (const auto* flag = history_.stale_flag(e->fqn)) {
        for (const auto& c : flag->changes) predicted.push_back(change_to_json(c));
    }
    json out{{"fqn", e->fqn},
             {"file", e->file},
             {"line", e->line},
             {"exact_cost_text", e->exact_cost.render()},
             {"big_o_text", cost::big_o_text(e->exact_cost)},
             {"severity", cost::severity_name(cost::severity(e->exact_cost))},
             {"trace", trace},
             {"history", hist},
             {"predicted_changes", predicted},
             {"stale", history_.is_stale(e->fqn)}};
    if (const auto step = history_.latest_evolution(e->fqn); step && step->verdict != cost::Verdict::Same) {
        out["evolution_text"] = step->text();
    }
    return out;
}

json ServerCore::overview(const json& params) {
    const std::string file = relative(require_string(params, "file"));
    const auto index = source::index_source(file, current_content(file));
    std::vector<LensItem> items;
    {
        const std::shared_lock lock(state_mutex_);
        items = build_lenses(index, db_, &history_);
    }
    sort_for_overview(items);
    json out = json::array();
    for (const auto& item : items) {
        out.push_back({{"fqn", item.fqn},
                       {"line", item.range.start_line},
                       {"big_o_text", item.big_o_text},
                       {"severity", cost::severity_name(item.severity)}});
    }
    return out;
}

json ServerCore::analyze(const json& params) {
    const auto start = std::chrono::steady_clock::now();
    const std::string mode = params.is_object() && params.contains("mode") ? require_string(params, "mode") : "microlang";
    const bool incremental = params.is_object() && params.value("incremental", false);
    const std::lock_guard serial(analyze_mutex_);

    ingest::CostDatabase db;
    std::string source;
    if (mode == "microlang") {
        source = "microlang";
        try {
            const auto program = mini::load_workspace(root_);
            if (program.functions.empty()) throw RpcError(rpc_error::kAnalysisFailed, "no *.mini functions under the root");
            mini::AnalyzeOptions opts;
            opts.risky_constant = params.is_object() ? params.value("risky_constant", config_.risky_constant)
                                                     : config_.risky_constant;
            db = mini::to_cost_database(program, mini::analyze_costs(program, opts));
        } catch (const Error& e) {
            throw RpcError(rpc_error::kAnalysisFailed, e.what());
        }
    } else if (mode == "external") {
        source = "external";
        if (!config_.external_command) throw RpcError(rpc_error::kAnalysisFailed, "no external_command configured");
        const std::string cmd = "cd " + shell_quote(root_.string()) + " && " + *config_.external_command +
                                (incremental ? " --incremental" : "") + " 1>&2";
        const int status = std::system(cmd.c_str());
        if (status != 0) {
            throw RpcError(rpc_error::kAnalysisFailed, "external command failed with status " + std::to_string(status));
        }
        Diagnostics diag;
        try {
            fs::path report{config_.report_path};
            if (report.is_relative()) report = root_ / report;
            db = ingest::load_report(report, diag);
        } catch (const Error& e) {
            throw RpcError(rpc_error::kAnalysisFailed, e.what());
        }
        for (const auto& d : diag.items()) log_line(d.message);
    } else {
        throw RpcError(rpc_error::kInvalidParams, "mode must be \"microlang\" or \"external\"");
    }

    const std::unique_lock lock(state_mutex_);
    db_ = std::move(db);
    std::uint64_t run_id = 0;
    try {
        run_id = history_.record_database(db_, source);
    } catch (const IoError& e) {
        run_id = history_.last_run_id();
        log_line(std::string("history degraded: ") + e.what());
    }
    return {{"run_id", run_id}, {"procedures", db_.size()}, {"duration_ms", ms_since(start)}};
}

SaveTicket ServerCore::begin_save(const std::string& file, std::string new_content) {
    SaveTicket t;
    t.file = relative(file);
    const std::lock_guard lock(save_mutex_);
    t.generation = ++save_generation_[t.file];
    latest_[t.file] = new_content;
    const auto it = baseline_.find(t.file);
    if (it == baseline_.end()) {
        baseline_[t.file] = new_content;
        t.seed_only = true;
        return t;
    }
    t.old_content = it->second;
    t.new_content = std::move(new_content);
    return t;
}

void ServerCore::run_save(const SaveTicket& t) {
    if (t.seed_only) return;
    auto superseded = [&] {
        const std::lock_guard lock(save_mutex_);
        return save_generation_[t.file] != t.generation;
    };
    const auto report = change::assess_file(t.old_content, t.new_content, t.file, config_.weights, superseded);
    if (!report) return;
    {
        const std::lock_guard lock(save_mutex_);
        if (save_generation_[t.file] != t.generation) return;
        baseline_[t.file] = t.new_content;
    }
    json items = json::array();
    {
        const std::unique_lock lock(state_mutex_);
        history_.mark_stale(*report);
    }
    for (const auto& f : report->per_function) {
        if (!f.significant) continue;
        json changes = json::array();
        for (const auto& c : f.changes) changes.push_back(change_to_json(c));
        items.push_back({{"fqn", f.fqn_guess},
                         {"range", span_to_json(f.span)},
                         {"score", f.score},
                         {"significant", true},
                         {"changes", changes}});
    }
    if (items.empty()) return;
    const std::lock_guard lock(publish_mutex_);
    if (publish_) {
        publish_(make_notification("perf/staleness",
                                   {{"file", t.file}, {"items", items}, {"elapsed_ms", report->elapsed_ms}}));
    }
}

std::optional<json> ServerCore::handle(const json& message) {
    const bool has_id = message.is_object() && message.contains("id");
    const json id = has_id ? message.at("id") : json(nullptr);
    auto error = [&](int code, const std::string& msg) -> std::optional<json> {
        if (!has_id) {
            log_line("notification failed: " + msg);
            return std::nullopt;
        }
        return json{{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", msg}}}};
    };
    if (!message.is_object() || !message.contains("method") || !message.at("method").is_string()) {
        return json{{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", rpc_error::kInvalidRequest}, {"message", "invalid request"}}}};
    }
    const std::string method = message.at("method").get<std::string>();
    const json params = message.value("params", json::object());

    try {
        json result;
        if (method == "perf/loadReport") result = load_report(params);
        else if (method == "perf/lenses") result = lenses(params);
        else if (method == "perf/hover") result = hover(params);
        else if (method == "perf/detail") result = detail(params);
        else if (method == "perf/overview") result = overview(params);
        else if (method == "perf/analyze") result = analyze(params);
        else if (method == "perf/didSave") {
            const std::string file = require_string(params, "file");
            std::string content;
            if (params.contains("new_content")) content = require_string(params, "new_content");
            else content = read_text(root_ / relative(file)).value_or("");
            run_save(begin_save(file, std::move(content)));
            result = nullptr;
        } else if (method == "initialize") {
            result = {{"serverInfo", {{"name", "perflens"}}},
                      {"root", root_.string()},
                      {"methods", {"perf/loadReport", "perf/lenses", "perf/hover", "perf/detail", "perf/overview",
                                   "perf/analyze", "perf/didSave"}}};
        } else if (method == "shutdown") {
            result = nullptr;
        } else if (method == "exit") {
            exit_requested_ = true;
            return std::nullopt;
        } else {
            return error(rpc_error::kMethodNotFound, "method not found: " + method);
        }
        if (!has_id) return std::nullopt;
        return json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
    } catch (const RpcError& e) {
        return error(e.code(), e.what());
    } catch (const std::exception& e) {
        return error(-32603, std::string("internal error: ") + e.what());
    }
}

namespace {

class WorkerPool {
public:
    explicit WorkerPool(unsigned n) {
        for (unsigned i = 0; i < std::max(1U, n); ++i) threads_.emplace_back([this] { loop(); });
    }
    ~WorkerPool() {
        {
            const std::lock_guard lock(m_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }
    void submit(std::function<void()> task) {
        {
            const std::lock_guard lock(m_);
            queue_.push_back(std::move(task));
        }
        cv_.notify_one();
    }

private:
    void loop() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(m_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (queue_.empty()) return;
                task = std::move(queue_.front());
                queue_.pop_front();
            }
            task();
        }
    }

    std::mutex m_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    void set_framed(bool framed) { framed_ = framed; }
    void write(const json& j) {
        const std::string body = j.dump();
        const std::lock_guard lock(m_);
        if (framed_) out_ << "Content-Length: " << body.size() << "\r\n\r\n" << body;
        else out_ << body << '\n';
        out_.flush();
    }

private:
    std::ostream& out_;
    std::mutex m_;
    std::atomic<bool> framed_{false};
};

// Next message body, or nullopt at EOF. Sets `framed` for Content-Length input.
std::optional<std::string> read_message(std::istream& in, bool& framed) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        static constexpr std::string_view header = "Content-Length:";
        if (line.size() >= header.size() && std::equal(header.begin(), header.end(), line.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            framed = true;
            std::size_t length = 0;
            try {
                length = static_cast<std::size_t>(std::stoul(line.substr(header.size())));
            } catch (const std::exception&) {
                return std::string();
            }
            while (std::getline(in, line)) {  // remaining headers up to the blank line
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) break;
            }
            std::string body(length, '\0');
            in.read(body.data(), static_cast<std::streamsize>(length));
            if (static_cast<std::size_t>(in.gcount()) != length) return std::nullopt;
            return body;
        }
        return line;
    }
    return std::nullopt;
}

}  // namespace

int serve_stdio(ServerCore& core, std::istream& in, std::ostream& out, unsigned workers) {
    Writer writer(out);
    core.set_publisher([&writer](const json& n) { writer.write(n); });
    {
        WorkerPool pool(workers);
        bool framing_known = false;
        for (;;) {
            bool framed = false;
            const auto body = read_message(in, framed);
            if (!body) break;
            if (!framing_known) {
                writer.set_framed(framed);
                framing_known = true;
            }
            json message;
            try {
                message = json::parse(*body);
            } catch (const json::parse_error& e) {
                writer.write({{"jsonrpc", "2.0"},
                              {"id", nullptr},
                              {"error", {{"code", rpc_error::kParseError}, {"message", std::string("parse error: ") + e.what()}}}});
                continue;
            }
            const std::string method =
                message.is_object() && message.contains("method") && message["method"].is_string()
                    ? message["method"].get<std::string>()
                    : "";
            if (method == "perf/didSave" && message.contains("params") && message["params"].is_object() &&
                message["params"].contains("file") && message["params"]["file"].is_string()) {
                const auto& params = message["params"];
                std::string content;
                if (params.contains("new_content") && params["new_content"].is_string()) {
                    content = params["new_content"].get<std::string>();
                } else {
                    content = read_text(core.root() / core.relative(params["file"].get<std::string>())).value_or("");
                }
                auto ticket = core.begin_save(params["file"].get<std::string>(), std::move(content));
                pool.submit([&core, ticket = std::move(ticket)] { core.run_save(ticket); });
                continue;
            }
            if (ServerCore::is_mutation(method) || method.empty()) {
                if (auto response = core.handle(message)) writer.write(*response);
                if (core.exit_requested()) break;
                continue;
            }
            pool.submit([&core, &writer, message = std::move(message)] {
                if (auto response = core.handle(message)) writer.write(*response);
            });
        }
    }
    core.set_publisher({});
    return 0;
}

}  // namespace perflens::server
