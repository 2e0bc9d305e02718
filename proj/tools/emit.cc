#include "emit.h"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>

namespace qfound::cli {

std::string sha256_hex(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) {
        throw std::runtime_error("sha256 digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string json_text(const nlohmann::json &j) { return j.dump(2) + "\n"; }

nlohmann::json manifest(const std::string &scenario, const nlohmann::json &config,
                        const std::vector<Artifact> &files) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto &f : files) {
        list.push_back({{"path", f.path}, {"format", f.format}, {"bytes", f.content.size()},
                        {"sha256", sha256_hex(f.content)}});
    }
    return {{"scenario", scenario}, {"config", config}, {"files", list}};
}

void write_artifacts(const std::string &dir, const std::vector<Artifact> &files, const nlohmann::json &m) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw OutputError(dir + ": cannot create output directory");
    auto put = [&](const std::string &rel, const std::string &content) {
        const fs::path p = fs::path(dir) / rel;
        fs::create_directories(p.parent_path(), ec);
        std::ofstream out(p, std::ios::binary);
        out << content;
        if (!out) throw OutputError(p.string() + ": write failed");
    };
    for (const auto &f : files) put(f.path, f.content);
    put("manifest.json", json_text(m));
}

}  // namespace qfound::cli
