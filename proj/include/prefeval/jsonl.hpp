#pragma once

#include <filesystem>
#include <functional>
#include <fstream>
#include <string>

#include <json.hpp>

#include "prefeval/errors.hpp"

namespace prefeval::jsonl {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Calls `fn(line_number, parsed)` for every non-blank line; `on_bad(line_number,
/// raw, what)` for lines that fail to parse. Throws DataError if the file
/// cannot be opened.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn,
                     const std::function<void(std::size_t, const std::string&, const std::string&)>&
                         on_bad = nullptr);

/// Append-style writer emitting one compact JSON document per line.
class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw DataError("cannot open for writing: " + path.string());
    }

    template <typename J>
    void write(const J& record) {
        out_ << record.dump() << '\n';
        ++count_;
    }

    std::size_t count() const { return count_; }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::size_t count_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

} // namespace prefeval::jsonl
