#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>

#include "advisor/catalog.hpp"
#include "advisor/user_model.hpp"

namespace advisor {

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool valid_user_id(const std::string& id) {
    static const std::regex kId("[A-Za-z0-9_.-]{1,64}");
    return std::regex_match(id, kId) && id != "." && id != "..";
}

/// Writes `contents` to `path` so that readers see either the old file or the new one:
/// write a sibling temp file, flush it to disk, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw StorageError("cannot create " + tmp.string() + ": " + std::strerror(errno));
    std::size_t written = 0;
    while (written < contents.size()) {
        const ssize_t n = ::write(fd, contents.data() + written, contents.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            const std::string why = std::strerror(errno);
            ::close(fd);
            ::unlink(tmp.c_str());
            throw StorageError("cannot write " + tmp.string() + ": " + why);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        ::unlink(tmp.c_str());
        throw StorageError("cannot flush " + tmp.string());
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        const std::string why = std::strerror(errno);
        ::unlink(tmp.c_str());
        throw StorageError("cannot rename onto " + path.string() + ": " + why);
    }
    const int dfd = ::open(path.parent_path().empty() ? "." : path.parent_path().c_str(), O_RDONLY | O_DIRECTORY);
    if (dfd >= 0) {
        ::fsync(dfd);
        ::close(dfd);
    }
}

/// User models on disk, one JSON file per user under <data_dir>/users/.
class ModelStore {
public:
    ModelStore(std::filesystem::path data_dir, const AttributeSchema& schema, UpdatePolicy policy,
               std::vector<std::string> item_ids)
        : dir_(std::move(data_dir) / "users"), schema_(schema), policy_(policy), item_ids_(std::move(item_ids)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw StorageError("cannot create " + dir_.string() + ": " + ec.message());
    }

    std::filesystem::path path_for(const std::string& user_id) const {
        if (!valid_user_id(user_id)) throw std::invalid_argument("malformed user id '" + user_id + "'");
        return dir_ / (user_id + ".json");
    }

    bool exists(const std::string& user_id) const { return std::filesystem::exists(path_for(user_id)); }

    /// The stored file contents, or nullopt for a user never seen.
    std::optional<std::string> read_raw(const std::string& user_id) const {
        std::ifstream in(path_for(user_id), std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    /// Loads the user's model, or a fresh one with default priors on first contact.
    UserModel load_or_init(const std::string& user_id) const {
        auto raw = read_raw(user_id);
        if (!raw) return init_user_model(user_id, schema_, policy_, item_ids_);
        UserModel m = load_model(*raw, &schema_);
        if (m.user_id != user_id) throw StorageError("model file for '" + user_id + "' names another user");
        for (const auto& id : item_ids_)  // catalog may have grown since the model was written
            if (!m.item_stats.count(id)) m.item_stats[id] = ItemStats{policy_.init_accepted, policy_.init_presented, {}};
        return m;
    }

    void save(const UserModel& m) const { write_file_atomic(path_for(m.user_id), save_model(m)); }

    /// Serializes read-modify-write of one user's model across sessions.
    std::mutex& lock_for(const std::string& user_id) {
        std::lock_guard<std::mutex> g(locks_mu_);
        auto& slot = locks_[user_id];
        if (!slot) slot = std::make_unique<std::mutex>();
        return *slot;
    }

    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    const AttributeSchema& schema_;
    UpdatePolicy policy_;
    std::vector<std::string> item_ids_;
    std::mutex locks_mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace advisor
