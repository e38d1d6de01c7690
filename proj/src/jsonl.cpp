#include "prefeval/jsonl.hpp"

#include <sstream>

namespace prefeval::jsonl {

void for_each_record(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const json&)>& fn,
    const std::function<void(std::size_t, const std::string&, const std::string&)>& on_bad) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            if (on_bad) {
                on_bad(line_no, line, "invalid JSON");
                continue;
            }
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        fn(line_no, record);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << contents;
}

} // namespace prefeval::jsonl
