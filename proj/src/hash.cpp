#include "svt/hash.hpp"

#include <fstream>
#include <iterator>
#include <vector>

#include <openssl/evp.h>

#include "svt/error.hpp"

namespace svt {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
        fail(ErrorCode::numeric, "SHA-256 computation failed");
    return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    const auto digest = sha256(bytes);
    std::string hex;
    hex.reserve(64);
    for (auto b : digest) {
        hex.push_back(digits[b >> 4]);
        hex.push_back(digits[b & 15]);
    }
    return hex;
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string file_sha256_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for hashing");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

}  // namespace svt
