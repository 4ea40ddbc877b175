#include "kernel/run_record.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kernel/errors.hpp"

namespace hare {

std::vector<json> RunRecord::events_of(const std::string& type) const {
    std::vector<json> out;
    for (const auto& e : events_)
        if (e.value("type", "") == type) out.push_back(e);
    return out;
}

json RunRecord::summary() const {
    for (auto it = events_.rbegin(); it != events_.rend(); ++it)
        if (it->value("type", "") == "summary") return it->value("metrics", json{});
    return nullptr;
}

std::string RunRecord::to_jsonl() const {
    std::string out = header_.dump();
    out += '\n';
    for (const auto& e : events_) {
        out += e.dump();
        out += '\n';
    }
    return out;
}

void RunRecord::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_jsonl();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunRecord RunRecord::parse(const std::string& text) {
    RunRecord record;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        const bool terminated = end != std::string::npos;
        if (!terminated) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!terminated) throw ParseError(line_no, "truncated record (missing newline)");
        json value;
        try {
            value = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!value.is_object()) throw ParseError(line_no, "expected a JSON object");
        if (!have_header) {
            if (value.value("type", "") != "header") throw ParseError(line_no, "first line must be the header");
            record.header_ = std::move(value);
            have_header = true;
        } else {
            if (!value.contains("type")) throw ParseError(line_no, "event without type");
            record.events_.push_back(std::move(value));
        }
    }
    if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "empty record");
    return record;
}

RunRecord RunRecord::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace hare
