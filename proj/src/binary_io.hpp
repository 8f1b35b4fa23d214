#pragma once

// Little-endian readers/writers shared by the on-disk index and vector store.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "skillhub/errors.hpp"

namespace skillhub::detail {

static_assert(std::endian::native == std::endian::little, "store files assume a little-endian host");

class BinaryWriter {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const char*>(&value);
        buf_.append(p, sizeof(T));
    }

    template <typename T>
    void put_array(const std::vector<T>& values) {
        static_assert(std::is_trivially_copyable_v<T>);
        buf_.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(T));
    }

    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }

    void put_raw(std::string_view bytes) { buf_.append(bytes); }

    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class BinaryReader {
public:
    BinaryReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    template <typename T>
    std::vector<T> get_array(std::size_t count) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (count > (data_.size() - pos_) / sizeof(T)) fail("array extends past end of file");
        std::vector<T> out(count);
        std::memcpy(out.data(), data_.data() + pos_, count * sizeof(T));
        pos_ += count * sizeof(T);
        return out;
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string s(data_.substr(pos_, len));
        pos_ += len;
        return s;
    }

    std::string_view get_raw(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == data_.size(); }

    [[noreturn]] void fail(const std::string& message) const {
        throw FormatError(what_ + " (byte offset " + std::to_string(pos_) + "): " + message);
    }

private:
    void need(std::size_t n) const {
        if (n > data_.size() - pos_) fail("unexpected end of file");
    }

    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

}  // namespace skillhub::detail
