#pragma once

#include <atomic>
#include <filesystem>
#include <string>

namespace testsupport {

// Unique scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "badbox") {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = (base / (tag + "-" + std::to_string(::getpid()) + "-" +
                         std::to_string(counter.fetch_add(1))))
                    .string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string sub(const std::string& name) const {
        const auto p = std::filesystem::path(path_) / name;
        return p.string();
    }
    std::string subdir(const std::string& name) const {
        const auto p = std::filesystem::path(path_) / name;
        std::filesystem::create_directories(p);
        return p.string();
    }

private:
    std::string path_;
};

} // namespace testsupport
