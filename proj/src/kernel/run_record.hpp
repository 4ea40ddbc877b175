#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hare {

using json = nlohmann::json;

/// Persisted run: one header line (resolved config + seed), then one line per
/// event in emission order. Event types: "sample", "intervention",
/// "forecast", "summary".
class RunRecord {
public:
    RunRecord() = default;
    explicit RunRecord(json header) : header_(std::move(header)) {}

    const json& header() const { return header_; }
    json& header() { return header_; }
    const std::vector<json>& events() const { return events_; }
    void append(json event) { events_.push_back(std::move(event)); }

    std::vector<json> events_of(const std::string& type) const;
    /// The "summary" event's payload, or null when the run did not finish.
    json summary() const;

    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;

    /// Throws ParseError naming the first bad line (1-based).
    static RunRecord parse(const std::string& text);
    static RunRecord read(const std::filesystem::path& path);

private:
    json header_;
    std::vector<json> events_;
};

}  // namespace hare
