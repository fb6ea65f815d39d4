#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "synthesizer.hpp"
#include "tuner.hpp"

namespace synthbench {

inline constexpr int bridge_protocol_version = 1;

/// Child process speaking newline-delimited text on its stdin/stdout.
/// stderr is inherited.
class BridgeProcess {
public:
    explicit BridgeProcess(const std::string& command) : command_(command) {
        ::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0) throw BridgeError("bridge: pipe failed: " + std::string(std::strerror(errno)));
        if (::pipe(from_child) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            throw BridgeError("bridge: pipe failed: " + std::string(std::strerror(errno)));
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
            throw BridgeError("bridge: fork failed: " + std::string(std::strerror(errno)));
        }
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
        ::fcntl(in_fd_, F_SETFD, FD_CLOEXEC);
        ::fcntl(out_fd_, F_SETFD, FD_CLOEXEC);
    }

    BridgeProcess(const BridgeProcess&) = delete;
    BridgeProcess& operator=(const BridgeProcess&) = delete;

    ~BridgeProcess() {
        close_stdin();
        if (out_fd_ >= 0) ::close(out_fd_);
        if (!exit_code_ && pid_ > 0) {
            if (!wait_exit(std::chrono::milliseconds(2000))) {
                ::kill(pid_, SIGKILL);
                int status = 0;
                ::waitpid(pid_, &status, 0);
            }
        }
    }

    const std::string& command() const noexcept { return command_; }

    void write_line(const std::string& line) {
        if (in_fd_ < 0) throw BridgeError("bridge: stdin of '" + command_ + "' is closed");
        std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            const auto n = ::write(in_fd_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BridgeError("bridge: write to '" + command_ + "' failed: " + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    /// Next line from the child's stdout; nullopt on EOF. Throws on timeout.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            if (eof_) {
                if (buffer_.empty()) return std::nullopt;
                return std::exchange(buffer_, std::string());
            }
            const auto left =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw BridgeError("bridge: timed out waiting for '" + command_ + "'");
            pollfd p{out_fd_, POLLIN, 0};
            const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000000)));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw BridgeError("bridge: poll failed: " + std::string(std::strerror(errno)));
            }
            if (rc == 0) continue;
            char chunk[4096];
            const auto n = ::read(out_fd_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BridgeError("bridge: read failed: " + std::string(std::strerror(errno)));
            }
            if (n == 0)
                eof_ = true;
            else
                buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void close_stdin() {
        if (in_fd_ >= 0) ::close(in_fd_);
        in_fd_ = -1;
    }

    /// Exit status once the child has exited (-signal when killed).
    std::optional<int> wait_exit(std::chrono::milliseconds timeout) {
        if (exit_code_) return exit_code_;
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            int status = 0;
            const pid_t r = ::waitpid(pid_, &status, WNOHANG);
            if (r == pid_) {
                exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
                return exit_code_;
            }
            if (r < 0 && errno != EINTR) return std::nullopt;
            if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }

private:
    std::string command_;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
    bool eof_ = false;
    std::optional<int> exit_code_;
};

struct BridgeOptions {
    std::chrono::milliseconds timeout{std::chrono::minutes(30)};
};

/// Request/response client: {id, cmd, payload} out, {id, ok, payload|error} in.
class BridgeClient {
public:
    explicit BridgeClient(const std::string& command, BridgeOptions opts = {})
        : process_(std::make_unique<BridgeProcess>(command)), opts_(opts) {}

    /// Sends one request and returns the raw response object.
    nlohmann::json exchange(const std::string& cmd, const nlohmann::json& payload) {
        const std::uint64_t id = next_id_++;
        nlohmann::json req{{"id", id}, {"cmd", cmd}, {"payload", payload}};
        process_->write_line(req.dump());
        auto resp = receive();
        if (!resp.contains("id") || resp["id"] != id)
            throw BridgeError("bridge: response to '" + cmd + "' echoes id " +
                              (resp.contains("id") ? resp["id"].dump() : std::string("<none>")) + ", expected " +
                              std::to_string(id));
        if (!resp.contains("ok") || !resp["ok"].is_boolean())
            throw BridgeError("bridge: response to '" + cmd + "' lacks a boolean 'ok'");
        return resp;
    }

    /// exchange() that throws the child's error text on ok=false.
    nlohmann::json request(const std::string& cmd, const nlohmann::json& payload = nlohmann::json::object()) {
        auto resp = exchange(cmd, payload);
        if (!resp["ok"].get<bool>())
            throw BridgeError("bridge: '" + cmd + "' failed: " + resp.value("error", std::string("<no error text>")));
        return resp.value("payload", nlohmann::json::object());
    }

    nlohmann::json receive() {
        auto line = process_->read_line(opts_.timeout);
        if (!line) throw BridgeError("bridge: '" + process_->command() + "' closed its output");
        try {
            auto j = nlohmann::json::parse(*line);
            if (!j.is_object()) throw BridgeError("bridge: response is not a JSON object: " + *line);
            return j;
        } catch (const nlohmann::json::exception&) {
            throw BridgeError("bridge: malformed response line: " + *line);
        }
    }

    void handshake() {
        auto p = request("handshake", {{"protocol_version", bridge_protocol_version}});
        if (p.value("protocol_version", -1) != bridge_protocol_version)
            throw BridgeError("bridge: child speaks protocol version " + p.value("protocol_version", nlohmann::json()).dump() +
                              ", expected " + std::to_string(bridge_protocol_version));
    }

    /// Sends shutdown and waits for the exit status.
    std::optional<int> shutdown(std::chrono::milliseconds wait = std::chrono::seconds(10)) {
        request("shutdown");
        process_->close_stdin();
        return process_->wait_exit(wait);
    }

    BridgeProcess& process() { return *process_; }
    std::uint64_t next_id() const noexcept { return next_id_; }

private:
    std::unique_ptr<BridgeProcess> process_;
    BridgeOptions opts_;
    std::uint64_t next_id_ = 1;
};

namespace detail {

/// Private scratch directory, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& prefix) {
        static std::atomic<std::uint64_t> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        for (;;) {
            path_ = base / (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
            std::error_code ec;
            if (std::filesystem::create_directory(path_, ec)) break;
            if (ec) throw BridgeError("cannot create scratch directory '" + path_.string() + "': " + ec.message());
        }
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Loads a child-written sample against the training table's schema and
/// vocabularies.
inline Table load_bridge_sample(const std::string& path, const Table& train, std::size_t expected_rows) {
    Table t = [&] {
        try {
            LoadOptions opts;
            opts.vocabulary_source = &train;
            return load_csv(path, to_spec(train.schema()), opts);
        } catch (const DatasetError& e) {
            throw BridgeError("bridge: sample file '" + path + "' does not match the training schema: " + e.what());
        }
    }();
    if (!t.schema().compatible_with(train.schema()) || t.schema().dataset_name != train.schema().dataset_name)
        throw BridgeError("bridge: sample file '" + path + "' has a different column layout");
    if (t.n_rows() != expected_rows)
        throw BridgeError("bridge: sample file '" + path + "' has " + std::to_string(t.n_rows()) + " rows, expected " +
                          std::to_string(expected_rows));
    return t;
}

}  // namespace detail

/// Synthesizer whose model lives in a child process. One child per instance.
class BridgeSynthesizer final : public Synthesizer {
public:
    explicit BridgeSynthesizer(std::string command, BridgeOptions opts = {})
        : command_(std::move(command)), opts_(opts) {}

    ~BridgeSynthesizer() override {
        if (!client_) return;
        try {
            client_->shutdown(std::chrono::seconds(2));
        } catch (const Error&) {
        }
    }

    void prepare_fit(const Config& config, const Table& train, std::uint64_t seed) override {
        if (!client_) {
            scratch_ = std::make_unique<detail::ScratchDir>("synthbench-bridge");
            client_ = std::make_unique<BridgeClient>(command_, opts_);
            client_->handshake();
        }
        train_ = std::make_unique<Table>(train);
        const auto csv_path = (scratch_->path() / "train.csv").string();
        const auto schema_path = (scratch_->path() / "train.schema").string();
        write_csv(csv_path, train);
        write_schema(schema_path, train.schema());
        client_->request("prepare_fit",
                         {{"config", config_to_json(config)}, {"train_csv", csv_path}, {"schema", schema_path},
                          {"seed", seed}});
    }

    StepReport train_step() override {
        require_fit();
        auto p = client_->request("train_step");
        StepReport r;
        try {
            r.step_index = p.at("step_index").get<std::size_t>();
            r.early_stop = p.value("early_stop", false);
        } catch (const nlohmann::json::exception& e) {
            throw BridgeError(std::string("bridge: malformed train_step payload: ") + e.what());
        }
        return r;
    }

    Table sample(std::size_t n, std::uint64_t seed) override {
        require_fit();
        auto p = client_->request("sample", {{"n", n}, {"seed", seed}});
        if (!p.contains("path") || !p["path"].is_string()) throw BridgeError("bridge: sample payload lacks 'path'");
        return detail::load_bridge_sample(p["path"].get<std::string>(), *train_, n);
    }

    std::string name() const override { return "bridge:" + command_; }

private:
    void require_fit() const {
        if (!train_) throw GeneratorError("bridge: prepare_fit has not been called");
    }

    std::string command_;
    BridgeOptions opts_;
    std::unique_ptr<detail::ScratchDir> scratch_;
    std::unique_ptr<BridgeClient> client_;
    std::unique_ptr<Table> train_;
};

// ----------------------------------------------------------------------------
// Conformance fixture
// ----------------------------------------------------------------------------

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

/// Small mixed-type table the fixture feeds to the child.
inline Table conformance_table() {
    SchemaSpec spec;
    spec.dataset_name = "bridge_fixture";
    spec.task = TaskKind::binclass;
    spec.target = "label";
    spec.columns = {{"x", ColumnKind::numeric}, {"color", ColumnKind::categorical}, {"label", ColumnKind::categorical}};
    std::string text = "x,color,label\n";
    static const char* colors[] = {"red", "green", "blue"};
    for (int i = 0; i < 30; ++i)
        text += std::to_string(i) + ".5," + colors[i % 3] + "," + (i % 2 ? "yes" : "no") + "\n";
    return parse_csv_table(text, spec);
}

}  // namespace detail

/// Drives a child through handshake, state-machine violations, malformed
/// input, a full fit/step/sample cycle and shutdown. One entry per check.
inline std::vector<ConformanceCheck> run_conformance(const std::string& command,
                                                     std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    std::vector<ConformanceCheck> out;
    auto check = [&](const std::string& name, auto&& body) {
        ConformanceCheck c{name, false, {}};
        try {
            c.detail = body();
            c.passed = c.detail.empty();
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        out.push_back(std::move(c));
        return out.back().passed;
    };

    BridgeOptions opts;
    opts.timeout = timeout;
    BridgeClient client(command, opts);
    detail::ScratchDir scratch("synthbench-conformance");
    const Table train = detail::conformance_table();

    if (!check("handshake", [&] {
            client.handshake();
            return std::string();
        }))
        return out;

    check("train_step before prepare_fit is refused", [&] {
        auto r = client.exchange("train_step", nlohmann::json::object());
        return r["ok"].get<bool>() ? std::string("child accepted train_step before prepare_fit") : std::string();
    });
    check("sample before prepare_fit is refused", [&] {
        auto r = client.exchange("sample", {{"n", 5}, {"seed", 1}});
        return r["ok"].get<bool>() ? std::string("child accepted sample before prepare_fit") : std::string();
    });
    check("unknown command is refused", [&] {
        auto r = client.exchange("no_such_command", nlohmann::json::object());
        if (r["ok"].get<bool>()) return std::string("child accepted an unknown command");
        if (!r.contains("error") || !r["error"].is_string()) return std::string("error response lacks error text");
        return std::string();
    });
    check("malformed line is answered with ok=false", [&] {
        client.process().write_line("{this is not json");
        auto r = client.receive();
        if (!r.contains("ok") || r["ok"] != false) return std::string("expected ok=false, got " + r.dump());
        return std::string();
    });

    const auto csv_path = (scratch.path() / "train.csv").string();
    const auto schema_path = (scratch.path() / "train.schema").string();
    write_csv(csv_path, train);
    write_schema(schema_path, train.schema());
    const bool fitted = check("prepare_fit", [&] {
        client.request("prepare_fit", {{"config", nlohmann::json::object()},
                                       {"train_csv", csv_path},
                                       {"schema", schema_path},
                                       {"seed", 7}});
        return std::string();
    });
    if (fitted) {
        check("train_step reports consecutive step indices", [&] {
            for (std::size_t s = 1; s <= 2; ++s) {
                auto p = client.request("train_step");
                if (p.value("step_index", std::size_t{0}) != s)
                    return "step " + std::to_string(s) + " reported " + p.value("step_index", nlohmann::json()).dump();
                if (!p.contains("early_stop") || !p["early_stop"].is_boolean())
                    return std::string("train_step payload lacks a boolean early_stop");
            }
            return std::string();
        });
        check("sample(5) matches the training schema", [&] {
            auto p = client.request("sample", {{"n", 5}, {"seed", 11}});
            if (!p.contains("path") || !p["path"].is_string()) return std::string("sample payload lacks 'path'");
            detail::load_bridge_sample(p["path"].get<std::string>(), train, 5);
            return std::string();
        });
        check("child stays alive after a failed request", [&] {
            auto bad = client.exchange("sample", {{"n", "five"}});
            if (bad["ok"].get<bool>()) return std::string("child accepted a non-numeric n");
            auto p = client.request("sample", {{"n", 3}, {"seed", 12}});
            detail::load_bridge_sample(p.at("path").get<std::string>(), train, 3);
            return std::string();
        });
    }
    check("shutdown exits with status 0", [&] {
        auto code = client.shutdown();
        if (!code) return std::string("child did not exit");
        if (*code != 0) return "child exited with status " + std::to_string(*code);
        return std::string();
    });
    return out;
}

}  // namespace synthbench
