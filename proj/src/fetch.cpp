// Dataset download and checksum plumbing. Kept in its own TU because
// cpp-httplib with TLS support is heavy to compile.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tda/errors.hpp"
#include "tda/market_data.hpp"

namespace tda {

namespace {

struct DigestCtx {
    EVP_MD_CTX* ctx;
    DigestCtx() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256 init failed");
    }
    ~DigestCtx() { EVP_MD_CTX_free(ctx); }
    void update(const void* data, size_t len) {
        if (EVP_DigestUpdate(ctx, data, len) != 1)
            throw std::runtime_error("sha256 update failed");
    }
    std::string finish() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx, md, &len) != 1)
            throw std::runtime_error("sha256 final failed");
        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(hex[md[i] >> 4]);
            out.push_back(hex[md[i] & 0xf]);
        }
        return out;
    }
};

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
    DigestCtx d;
    if (!bytes.empty()) d.update(bytes.data(), bytes.size());
    return d.finish();
}

std::string sha256_hex(const std::string& s) {
    return sha256_hex(
        std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::string sha256_file_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for hashing: " + path.string());
    DigestCtx d;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        d.update(buf, static_cast<size_t>(in.gcount()));
    return d.finish();
}

namespace {

// Splits an http(s) URL into the scheme://host[:port] base and the request path.
// Any other scheme is refused here, before httplib gets to throw its own type.
std::pair<std::string, std::string> split_url(const std::string& url) {
    if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
        throw ConfigError("unsupported url (expected http:// or https://): " + url);
    const auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::filesystem::path fetch_dataset(const std::string& url, const std::filesystem::path& cache_dir,
                                    std::string* checksum_out) {
    std::filesystem::create_directories(cache_dir);
    const auto cached = cache_dir / (sha256_hex(url) + ".csv");
    const auto sidecar = cache_dir / (sha256_hex(url) + ".csv.sha256");
    if (std::filesystem::exists(cached)) {
        if (checksum_out) *checksum_out = sha256_file_hex(cached);
        return cached;
    }

    auto [base, path] = split_url(url);
    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    const auto tmp = cache_dir / (sha256_hex(url) + ".csv.part");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write cache file: " + tmp.string());

    auto res = client.Get(path, [&](const char* data, size_t len) {
        out.write(data, static_cast<std::streamsize>(len));
        return static_cast<bool>(out);
    });
    out.close();
    if (!res || res->status != 200) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        std::string detail = res ? "HTTP status " + std::to_string(res->status)
                                 : "connection failed (" + httplib::to_string(res.error()) + ")";
        throw DataError("fetch failed for " + url + ": " + detail);
    }
    std::filesystem::rename(tmp, cached);

    const auto checksum = sha256_file_hex(cached);
    std::ofstream side(sidecar, std::ios::trunc);
    side << checksum << "\n";
    if (checksum_out) *checksum_out = checksum;
    return cached;
}

}  // namespace tda
