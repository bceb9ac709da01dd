#include "tracechain/blob_store.hpp"

#include <fstream>
#include <random>
#include <system_error>

#include "tracechain/errors.hpp"

namespace tracechain {

namespace fs = std::filesystem;

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {}

fs::path BlobStore::path_for(const BlobAddress& address) const {
    const std::string hex = address.hex();
    return root_ / hex.substr(0, 2) / hex.substr(2);
}

namespace {

std::optional<Bytes> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) return std::nullopt;
    return bytes;
}

} // namespace

BlobAddress BlobStore::put(std::span<const std::uint8_t> bytes) {
    const BlobAddress address = sha256(bytes);
    const fs::path target = path_for(address);

    std::error_code ec;
    if (fs::exists(target, ec)) {
        return address; // content addressing: identical bytes, same object
    }
    fs::create_directories(target.parent_path(), ec);
    if (ec) raise(Errc::io_failure, "cannot create store dir: " + ec.message());

    // Write-then-rename keeps concurrent puts of the same content convergent
    // and never exposes partial objects.
    static std::mt19937_64 rng{std::random_device{}()};
    const fs::path tmp = target.parent_path()
        / (".tmp-" + address.hex().substr(2, 8) + "-" + std::to_string(rng()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io_failure, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            raise(Errc::io_failure, "short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        raise(Errc::io_failure, "cannot move blob into place: " + ec.message());
    }
    return address;
}

Bytes BlobStore::get(const BlobAddress& address) const {
    auto bytes = read_file(path_for(address));
    if (!bytes) {
        raise(Errc::not_found, "no object " + address.hex());
    }
    if (sha256(*bytes) != address) {
        raise(Errc::integrity_failure,
              "stored bytes no longer match address " + address.hex());
    }
    return std::move(*bytes);
}

std::optional<Bytes> BlobStore::read_raw(const BlobAddress& address) const {
    return read_file(path_for(address));
}

bool BlobStore::contains(const BlobAddress& address) const {
    std::error_code ec;
    return fs::exists(path_for(address), ec);
}

} // namespace tracechain
