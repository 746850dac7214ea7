#pragma once

// Server-sent events: frame encoding for the service, incremental parsing
// for the remote backend and test clients.

#include <string>
#include <string_view>
#include <vector>

namespace rambler::sse {

struct Event {
    std::string event = "message";
    std::string data;
    std::string id;
};

inline std::string format(std::string_view event, std::string_view data) {
    std::string out = "event: ";
    out.append(event);
    out.push_back('\n');
    std::size_t pos = 0;
    while (true) {
        auto nl = data.find('\n', pos);
        out.append("data: ");
        out.append(data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        out.push_back('\n');
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    out.push_back('\n');
    return out;
}

/// Incremental parser; feed arbitrary byte slices, collect complete events.
class Parser {
public:
    std::vector<Event> feed(std::string_view bytes) {
        buffer_.append(bytes);
        std::vector<Event> out;
        std::size_t pos = 0;
        while (true) {
            auto nl = buffer_.find('\n', pos);
            if (nl == std::string::npos) break;
            std::string_view line(buffer_.data() + pos, nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            pos = nl + 1;
            if (line.empty()) {
                if (has_data_ || current_.event != "message") {
                    out.push_back(std::move(current_));
                }
                current_ = {};
                has_data_ = false;
                continue;
            }
            if (line.front() == ':') continue;  // comment / keep-alive
            auto colon = line.find(':');
            std::string_view field = line.substr(0, colon);
            std::string_view value = colon == std::string_view::npos ? std::string_view{} : line.substr(colon + 1);
            if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
            if (field == "event") {
                current_.event = value;
            } else if (field == "data") {
                if (has_data_) current_.data.push_back('\n');
                current_.data.append(value);
                has_data_ = true;
            } else if (field == "id") {
                current_.id = value;
            }
        }
        buffer_.erase(0, pos);
        return out;
    }

private:
    std::string buffer_;
    Event current_;
    bool has_data_ = false;
};

}  // namespace rambler::sse
