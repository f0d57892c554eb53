#pragma once

// Minimal XML reader/writer covering exactly the subset the wire formats
// use: one root element, prefixed names, quoted attributes, character data
// with the five predefined entities plus numeric references, comments and
// CDATA. No DTDs, no schema awareness. Serialization is canonical: UTF-8,
// attribute order preserved, no insignificant whitespace, one line.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ria/error.hpp"

namespace ria::xml {

struct Node {
    std::string name;  // as written, prefix included
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;
    std::string text;  // direct character data, segments concatenated

    std::string_view local_name() const {
        auto pos = name.rfind(':');
        return pos == std::string::npos ? std::string_view(name)
                                        : std::string_view(name).substr(pos + 1);
    }

    const std::string* attribute(std::string_view attr_name) const {
        for (const auto& [k, v] : attributes) {
            if (k == attr_name) return &v;
        }
        return nullptr;
    }

    // First child whose local name matches.
    const Node* child(std::string_view local) const {
        for (const auto& c : children) {
            if (c.local_name() == local) return &c;
        }
        return nullptr;
    }

    // Depth-first search over the subtree, self included.
    const Node* descendant(std::string_view local) const {
        if (local_name() == local) return this;
        for (const auto& c : children) {
            if (const Node* hit = c.descendant(local)) return hit;
        }
        return nullptr;
    }

    void gather_text(std::string& out) const {
        out += text;
        for (const auto& c : children) {
            out.push_back(' ');
            c.gather_text(out);
        }
    }

    // All character data in the subtree with whitespace runs collapsed to
    // single spaces and ends trimmed.
    std::string collapsed_text() const {
        std::string raw;
        gather_text(raw);
        std::string out;
        bool in_space = true;
        for (char c : raw) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                if (!in_space && !out.empty()) out.push_back(' ');
                in_space = true;
            } else {
                out.push_back(c);
                in_space = false;
            }
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out;
    }

    std::string trimmed_text() const {
        std::size_t begin = text.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        std::size_t end = text.find_last_not_of(" \t\r\n");
        return text.substr(begin, end - begin + 1);
    }
};

namespace detail {

constexpr std::size_t kMaxDepth = 200;

class Parser {
public:
    explicit Parser(std::string_view input) : in_(input) {}

    Node parse_document() {
        skip_bom();
        skip_misc();
        if (eof() || peek() != '<') fail("expected root element");
        Node root = parse_element(0);
        skip_misc();
        if (!eof()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        raise(ErrorCode::XmlMalformed, why + " at offset " + std::to_string(pos_));
    }

    bool eof() const { return pos_ >= in_.size(); }
    char peek() const { return in_[pos_]; }
    char peek_at(std::size_t ahead) const {
        return pos_ + ahead < in_.size() ? in_[pos_ + ahead] : '\0';
    }
    char take() { return in_[pos_++]; }

    bool starts_with(std::string_view s) const {
        return in_.substr(pos_, s.size()) == s;
    }

    void skip_bom() {
        if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
    }

    static bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    }

    void skip_space() {
        while (!eof() && is_space(peek())) ++pos_;
    }

    // Prolog / epilog junk: whitespace, the XML declaration, processing
    // instructions, comments.
    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts_with("<?")) {
                skip_until("?>");
            } else if (starts_with("<!--")) {
                pos_ += 4;
                skip_until("-->");
            } else if (starts_with("<!")) {
                fail("doctype and markup declarations are not supported");
            } else {
                return;
            }
        }
    }

    void skip_until(std::string_view terminator) {
        std::size_t found = in_.find(terminator, pos_);
        if (found == std::string_view::npos) fail("unterminated markup");
        pos_ = found + terminator.size();
    }

    static bool is_name_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    }
    static bool is_name_char(char c) {
        return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    std::string parse_name() {
        if (eof() || !is_name_start(peek())) fail("expected name");
        std::size_t begin = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        return std::string(in_.substr(begin, pos_ - begin));
    }

    void decode_entity(std::string& out) {
        // the caller has consumed the '&'
        std::size_t semi = in_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail("bad entity");
        std::string_view entity = in_.substr(pos_, semi - pos_);
        pos_ = semi + 1;
        if (entity == "amp") {
            out.push_back('&');
        } else if (entity == "lt") {
            out.push_back('<');
        } else if (entity == "gt") {
            out.push_back('>');
        } else if (entity == "quot") {
            out.push_back('"');
        } else if (entity == "apos") {
            out.push_back('\'');
        } else if (!entity.empty() && entity[0] == '#') {
            out += decode_char_ref(entity.substr(1));
        } else {
            fail("unknown entity");
        }
    }

    std::string decode_char_ref(std::string_view digits) const {
        std::uint32_t value = 0;
        bool hex = !digits.empty() && (digits[0] == 'x' || digits[0] == 'X');
        if (hex) digits.remove_prefix(1);
        if (digits.empty()) raise(ErrorCode::XmlMalformed, "empty character reference");
        for (char c : digits) {
            std::uint32_t digit;
            if (c >= '0' && c <= '9') {
                digit = static_cast<std::uint32_t>(c - '0');
            } else if (hex && c >= 'a' && c <= 'f') {
                digit = static_cast<std::uint32_t>(c - 'a' + 10);
            } else if (hex && c >= 'A' && c <= 'F') {
                digit = static_cast<std::uint32_t>(c - 'A' + 10);
            } else {
                raise(ErrorCode::XmlMalformed, "bad character reference");
            }
            value = value * (hex ? 16u : 10u) + digit;
            if (value > 0x10FFFF) raise(ErrorCode::XmlMalformed, "character reference out of range");
        }
        return encode_utf8(value);
    }

    static std::string encode_utf8(std::uint32_t cp) {
        std::string out;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        return out;
    }

    std::string parse_attribute_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        char quote = take();
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated attribute value");
            char c = peek();
            if (c == quote) {
                ++pos_;
                return value;
            }
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                ++pos_;
                decode_entity(value);
            } else {
                value.push_back(take());
            }
        }
    }

    Node parse_element(std::size_t depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        ++pos_;  // consume '<'
        Node node;
        node.name = parse_name();
        for (;;) {
            bool saw_space = !eof() && is_space(peek());
            skip_space();
            if (eof()) fail("unterminated start tag");
            if (peek() == '>') {
                ++pos_;
                parse_content(node, depth);
                return node;
            }
            if (peek() == '/' && peek_at(1) == '>') {
                pos_ += 2;
                return node;
            }
            if (!saw_space) fail("expected whitespace before attribute");
            std::string attr_name = parse_name();
            for (const auto& [existing, _] : node.attributes) {
                if (existing == attr_name) fail("duplicate attribute " + attr_name);
            }
            skip_space();
            if (eof() || take() != '=') fail("expected '=' after attribute name");
            skip_space();
            node.attributes.emplace_back(std::move(attr_name), parse_attribute_value());
        }
    }

    void parse_content(Node& node, std::size_t depth) {
        for (;;) {
            if (eof()) fail("unterminated element " + node.name);
            char c = peek();
            if (c == '<') {
                if (starts_with("</")) {
                    pos_ += 2;
                    std::string closing = parse_name();
                    if (closing != node.name) {
                        fail("mismatched closing tag " + closing + " for " + node.name);
                    }
                    skip_space();
                    if (eof() || take() != '>') fail("malformed closing tag");
                    return;
                }
                if (starts_with("<!--")) {
                    pos_ += 4;
                    skip_until("-->");
                } else if (starts_with("<![CDATA[")) {
                    pos_ += 9;
                    std::size_t end = in_.find("]]>", pos_);
                    if (end == std::string_view::npos) fail("unterminated CDATA");
                    node.text += std::string(in_.substr(pos_, end - pos_));
                    pos_ = end + 3;
                } else if (starts_with("<?")) {
                    skip_until("?>");
                } else if (starts_with("<!")) {
                    fail("markup declarations are not supported");
                } else {
                    node.children.push_back(parse_element(depth + 1));
                }
            } else if (c == '&') {
                ++pos_;
                decode_entity(node.text);
            } else {
                node.text.push_back(take());
            }
        }
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

inline void escape_into(std::string_view raw, bool in_attribute, std::string& out) {
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (in_attribute) {
                    out += "&quot;";
                } else {
                    out.push_back(c);
                }
                break;
            default: out.push_back(c);
        }
    }
}

}  // namespace detail

inline Node parse(std::string_view bytes) {
    return detail::Parser(bytes).parse_document();
}

inline void serialize_to(const Node& node, std::string& out) {
    out.push_back('<');
    out += node.name;
    for (const auto& [k, v] : node.attributes) {
        out.push_back(' ');
        out += k;
        out += "=\"";
        detail::escape_into(v, true, out);
        out.push_back('"');
    }
    if (node.text.empty() && node.children.empty()) {
        out += "/>";
        return;
    }
    out.push_back('>');
    detail::escape_into(node.text, false, out);
    for (const auto& c : node.children) serialize_to(c, out);
    out += "</";
    out += node.name;
    out.push_back('>');
}

inline std::string serialize(const Node& node) {
    std::string out;
    serialize_to(node, out);
    return out;
}

}  // namespace ria::xml
