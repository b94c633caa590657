#include "scratchwave/pattern_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "scratchwave/error.hpp"

namespace scratchwave {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return v;
}

std::optional<ProfileKind> to_profile(std::string_view s) {
    s = trim(s);
    if (s == "rect") return ProfileKind::Rect;
    if (s == "tri") return ProfileKind::Triangle;
    return std::nullopt;
}

const char* profile_name(ProfileKind p) { return p == ProfileKind::Rect ? "rect" : "tri"; }

}  // namespace

std::vector<ScratchSegment> parse_pattern_text(std::string_view text) {
    std::vector<ScratchSegment> out;
    size_t line_no = 0;
    while (!text.empty()) {
        const size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        while (!line.empty()) {
            size_t i = 0;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            fields.push_back(line.substr(0, i));
            line = trim(line.substr(i));
        }
        const auto where = "pattern line " + std::to_string(line_no);
        if (fields.size() != 7) fail(ErrorCode::ParseError, where + ": expected 7 fields");
        double v[6];
        for (int i = 0; i < 6; ++i) {
            const auto d = to_double(fields[static_cast<size_t>(i)]);
            if (!d) fail(ErrorCode::ParseError, where + ": bad number '" + std::string(fields[static_cast<size_t>(i)]) + "'");
            v[i] = *d;
        }
        const auto profile = to_profile(fields[6]);
        if (!profile) fail(ErrorCode::ParseError, where + ": unknown profile '" + std::string(fields[6]) + "'");
        ScratchSegment s{{v[0], v[1]}, {v[2], v[3]}, v[4], v[5], *profile, static_cast<std::int64_t>(out.size())};
        validate(s);
        out.push_back(s);
    }
    return out;
}

std::string format_pattern_text(std::span<const ScratchSegment> segments) {
    std::string out = "# x0 y0 x1 y1 width depth profile (meters)\n";
    char buf[256];
    for (const auto& s : segments) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %s\n", s.p0.x, s.p0.y, s.p1.x,
                      s.p1.y, s.width, s.depth, profile_name(s.profile));
        out += buf;
    }
    return out;
}

std::vector<ScratchSegment> load_pattern_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open pattern file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (path.extension() == ".svg") return parse_vector_pattern(text);
    return parse_pattern_text(text);
}

void save_pattern_file(const std::filesystem::path& path, std::span<const ScratchSegment> segments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write pattern file " + path.string());
    out << format_pattern_text(segments);
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

namespace {

struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attrs;
    size_t offset = 0;
};

// Tokenizes just enough XML for flat SVG documents: start/end/empty tags with
// attributes, comments, declarations and processing instructions. Text
// content is ignored.
class XmlScanner {
public:
    explicit XmlScanner(std::string_view doc) : doc_(doc) {}

    std::vector<XmlElement> elements() {
        std::vector<XmlElement> out;
        std::vector<std::string> open;
        while (pos_ < doc_.size()) {
            const size_t lt = doc_.find('<', pos_);
            if (lt == std::string_view::npos) break;
            pos_ = lt;
            if (starts("<!--")) {
                skip_past("-->", "unterminated comment");
            } else if (starts("<![CDATA[")) {
                skip_past("]]>", "unterminated CDATA section");
            } else if (starts("<?")) {
                skip_past("?>", "unterminated processing instruction");
            } else if (starts("<!")) {
                skip_past(">", "unterminated declaration");
            } else if (starts("</")) {
                const size_t at = pos_;
                pos_ += 2;
                const std::string name = read_name();
                skip_ws();
                expect('>');
                if (open.empty() || open.back() != name) error(at, "mismatched closing tag </" + name + ">");
                open.pop_back();
            } else {
                XmlElement e;
                e.offset = pos_;
                ++pos_;
                e.name = read_name();
                if (e.name.empty()) error(pos_, "expected element name");
                bool self_closing = false;
                for (;;) {
                    skip_ws();
                    if (pos_ >= doc_.size()) error(pos_, "unexpected end of document in tag");
                    if (starts("/>")) {
                        pos_ += 2;
                        self_closing = true;
                        break;
                    }
                    if (doc_[pos_] == '>') {
                        ++pos_;
                        break;
                    }
                    const size_t at = pos_;
                    std::string key = read_name();
                    if (key.empty()) error(at, "expected attribute name");
                    skip_ws();
                    expect('=');
                    skip_ws();
                    if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
                        error(pos_, "expected quoted attribute value");
                    }
                    const char q = doc_[pos_++];
                    const size_t end = doc_.find(q, pos_);
                    if (end == std::string_view::npos) error(pos_, "unterminated attribute value");
                    if (e.attrs.count(key)) error(at, "duplicate attribute " + key);
                    e.attrs[key] = std::string(doc_.substr(pos_, end - pos_));
                    pos_ = end + 1;
                }
                if (!self_closing) open.push_back(e.name);
                out.push_back(std::move(e));
            }
        }
        if (!open.empty()) error(doc_.size(), "unclosed element <" + open.back() + ">");
        if (out.empty()) error(0, "no root element");
        return out;
    }

private:
    [[noreturn]] void error(size_t at, const std::string& msg) {
        fail(ErrorCode::ParseError, "XML parse error at byte " + std::to_string(at) + ": " + msg);
    }
    bool starts(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }
    void skip_past(std::string_view term, const char* msg) {
        const size_t end = doc_.find(term, pos_);
        if (end == std::string_view::npos) error(pos_, msg);
        pos_ = end + term.size();
    }
    void skip_ws() {
        while (pos_ < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
    }
    void expect(char c) {
        if (pos_ >= doc_.size() || doc_[pos_] != c) error(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string read_name() {
        const size_t start = pos_;
        while (pos_ < doc_.size()) {
            const char c = doc_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.') {
                ++pos_;
            } else {
                break;
            }
        }
        return std::string(doc_.substr(start, pos_ - start));
    }

    std::string_view doc_;
    size_t pos_ = 0;
};

[[noreturn]] void unsupported(const XmlElement& e, const std::string& what) {
    fail(ErrorCode::UnsupportedFeature,
         "unsupported " + what + " in <" + e.name + "> at byte " + std::to_string(e.offset));
}

std::vector<double> parse_numbers(const XmlElement& e, std::string_view s) {
    std::vector<double> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
        if (i >= s.size()) break;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',') ++j;
        const auto v = to_double(s.substr(i, j - i));
        if (!v) fail(ErrorCode::ParseError, "bad number in <" + e.name + "> at byte " + std::to_string(e.offset));
        out.push_back(*v);
        i = j;
    }
    return out;
}

double attr_number(const XmlElement& e, const std::string& key, double fallback) {
    const auto it = e.attrs.find(key);
    if (it == e.attrs.end()) return fallback;
    const auto v = to_double(it->second);
    if (!v) fail(ErrorCode::ParseError, "bad " + key + " on <" + e.name + "> at byte " + std::to_string(e.offset));
    return *v;
}

// Splits path data into (command, coordinates) runs.
std::vector<std::pair<char, std::vector<double>>> path_commands(const XmlElement& e, std::string_view d) {
    std::vector<std::pair<char, std::vector<double>>> out;
    size_t i = 0;
    while (i < d.size()) {
        const char c = d[i];
        if (std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E') {
            if (c != 'M' && c != 'L' && c != 'Z') unsupported(e, std::string("path command \"") + c + "\"");
            size_t j = i + 1;
            while (j < d.size() && !(std::isalpha(static_cast<unsigned char>(d[j])) && d[j] != 'e' && d[j] != 'E')) ++j;
            out.emplace_back(c, parse_numbers(e, d.substr(i + 1, j - i - 1)));
            i = j;
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            ++i;
        } else {
            fail(ErrorCode::ParseError, "path data must start with a command in <path> at byte " + std::to_string(e.offset));
        }
    }
    return out;
}

}  // namespace

std::vector<ScratchSegment> parse_vector_pattern(std::string_view document) {
    const auto elements = XmlScanner(document).elements();
    const XmlElement& root = elements.front();
    if (root.name != "svg") fail(ErrorCode::ParseError, "root element must be <svg>");
    const auto mpu_it = root.attrs.find("data-meters-per-unit");
    if (mpu_it == root.attrs.end()) fail(ErrorCode::ParseError, "<svg> lacks required data-meters-per-unit");
    const auto mpu = to_double(mpu_it->second);
    if (!mpu || !(*mpu > 0.0)) fail(ErrorCode::ParseError, "data-meters-per-unit must be a positive number");
    const double scale = *mpu;

    std::vector<ScratchSegment> out;
    for (const auto& e : elements) {
        if (e.name != "line" && e.name != "polyline" && e.name != "path") continue;
        if (e.attrs.count("transform")) unsupported(e, "attribute \"transform\"");
        const double width = attr_number(e, "data-width", kDefaultSvgWidth);
        const double depth = attr_number(e, "data-depth", kDefaultSvgDepth);
        ProfileKind profile = ProfileKind::Rect;
        if (const auto it = e.attrs.find("data-profile"); it != e.attrs.end()) {
            const auto p = to_profile(it->second);
            if (!p) unsupported(e, "profile \"" + it->second + "\"");
            profile = *p;
        }
        auto emit = [&](Vec2 a, Vec2 b) {
            ScratchSegment s{a * scale, b * scale, width, depth, profile, static_cast<std::int64_t>(out.size())};
            if (s.length() == 0.0) return;  // repeated vertex
            validate(s);
            out.push_back(s);
        };
        if (e.name == "line") {
            emit({attr_number(e, "x1", 0.0), attr_number(e, "y1", 0.0)},
                 {attr_number(e, "x2", 0.0), attr_number(e, "y2", 0.0)});
        } else if (e.name == "polyline") {
            const auto it = e.attrs.find("points");
            if (it == e.attrs.end()) continue;
            const auto v = parse_numbers(e, it->second);
            if (v.size() % 2 != 0) fail(ErrorCode::ParseError, "odd coordinate count in <polyline> at byte " + std::to_string(e.offset));
            for (size_t i = 2; i + 1 < v.size(); i += 2) emit({v[i - 2], v[i - 1]}, {v[i], v[i + 1]});
        } else {
            const auto it = e.attrs.find("d");
            if (it == e.attrs.end()) continue;
            std::optional<Vec2> cur, start;
            for (const auto& [cmd, nums] : path_commands(e, it->second)) {
                if (cmd == 'Z') {
                    if (cur && start) emit(*cur, *start);
                    cur = start;
                    continue;
                }
                if (nums.empty() || nums.size() % 2 != 0) {
                    fail(ErrorCode::ParseError, std::string("bad coordinate count after '") + cmd + "' in <path> at byte " + std::to_string(e.offset));
                }
                for (size_t i = 0; i < nums.size(); i += 2) {
                    const Vec2 p{nums[i], nums[i + 1]};
                    // Extra pairs after M are implicit lineto.
                    if (cmd == 'M' && i == 0) {
                        cur = start = p;
                    } else {
                        if (!cur) fail(ErrorCode::ParseError, "path lineto before moveto at byte " + std::to_string(e.offset));
                        emit(*cur, p);
                        cur = p;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace scratchwave
