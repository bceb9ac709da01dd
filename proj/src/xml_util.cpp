#include "xml_util.hpp"

#include "tracechain/errors.hpp"

namespace tracechain::xml {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')
        || c == '.' || c == '_' || c == '-';
}

[[noreturn]] void bad(const std::string& message) {
    raise(Errc::malformed_xml, message);
}

class Parser {
public:
    explicit Parser(std::string_view input) : in_(input) {}

    Element parse() {
        skip_prolog();
        Element root = parse_element();
        skip_misc();
        if (pos_ != in_.size()) {
            bad("content after root element");
        }
        return root;
    }

private:
    std::string_view in_;
    std::size_t pos_ = 0;

    bool eof() const { return pos_ >= in_.size(); }
    char peek() const { return in_[pos_]; }
    bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

    void skip_ws() {
        while (!eof() && is_space(peek())) ++pos_;
    }

    void skip_comment() {
        pos_ += 4; // "<!--"
        const auto end = in_.find("-->", pos_);
        if (end == std::string_view::npos) bad("unterminated comment");
        pos_ = end + 3;
    }

    void skip_prolog() {
        skip_ws();
        if (starts_with("<?xml")) {
            const auto end = in_.find("?>", pos_);
            if (end == std::string_view::npos) bad("unterminated XML declaration");
            pos_ = end + 2;
        }
        skip_misc();
        if (eof()) bad("missing root element");
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            return;
        }
    }

    std::string parse_name() {
        const std::size_t start = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        if (pos_ == start) bad("expected a name");
        return std::string(in_.substr(start, pos_ - start));
    }

    std::string unescape(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size();) {
            const char c = raw[i];
            if (c == '<') bad("'<' in character data");
            if (c != '&') {
                out.push_back(c);
                ++i;
                continue;
            }
            const auto end = raw.find(';', i);
            if (end == std::string_view::npos) bad("unterminated entity");
            const std::string_view ent = raw.substr(i + 1, end - i - 1);
            if (ent == "amp") out.push_back('&');
            else if (ent == "lt") out.push_back('<');
            else if (ent == "gt") out.push_back('>');
            else if (ent == "quot") out.push_back('"');
            else if (ent == "apos") out.push_back('\'');
            else bad("unknown entity '&" + std::string(ent) + ";'");
            i = end + 1;
        }
        return out;
    }

    Attrs parse_attrs() {
        Attrs attrs;
        for (;;) {
            const bool had_space = !eof() && is_space(peek());
            skip_ws();
            if (eof()) bad("unterminated tag");
            if (peek() == '>' || peek() == '/') return attrs;
            if (!had_space) bad("missing space before attribute");
            std::string name = parse_name();
            skip_ws();
            if (eof() || peek() != '=') bad("attribute missing '='");
            ++pos_;
            skip_ws();
            if (eof() || (peek() != '"' && peek() != '\'')) bad("attribute value must be quoted");
            const char quote = peek();
            ++pos_;
            const auto end = in_.find(quote, pos_);
            if (end == std::string_view::npos) bad("unterminated attribute value");
            attrs.emplace_back(std::move(name), unescape(in_.substr(pos_, end - pos_)));
            pos_ = end + 1;
        }
    }

    Element parse_element() {
        if (eof() || peek() != '<') bad("expected element");
        ++pos_;
        Element el;
        el.name = parse_name();
        el.attrs = parse_attrs();
        if (peek() == '/') {
            ++pos_;
            if (eof() || peek() != '>') bad("malformed self-closing tag");
            ++pos_;
            return el;
        }
        ++pos_; // '>'
        parse_content(el);
        return el;
    }

    void parse_content(Element& el) {
        std::string text;
        bool text_is_space = true;
        for (;;) {
            if (eof()) bad("unterminated element <" + el.name + ">");
            if (peek() == '<') {
                if (starts_with("<!--")) {
                    skip_comment();
                    continue;
                }
                if (starts_with("</")) {
                    pos_ += 2;
                    const std::string closing = parse_name();
                    skip_ws();
                    if (eof() || peek() != '>') bad("malformed closing tag");
                    ++pos_;
                    if (closing != el.name) {
                        bad("mismatched closing tag </" + closing + "> for <" + el.name + ">");
                    }
                    if (!el.children.empty()) {
                        if (!text_is_space) bad("mixed text and elements in <" + el.name + ">");
                        return;
                    }
                    el.text = unescape(text);
                    return;
                }
                if (!text_is_space) bad("mixed text and elements in <" + el.name + ">");
                el.children.push_back(parse_element());
                continue;
            }
            const char c = peek();
            if (!is_space(c)) text_is_space = false;
            text.push_back(c);
            ++pos_;
        }
    }
};

} // namespace

const Element* Element::child(std::string_view name) const {
    for (const Element& c : children) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const std::string* Element::attr(std::string_view name) const {
    for (const auto& [key, value] : attrs) {
        if (key == name) return &value;
    }
    return nullptr;
}

Element parse_document(std::string_view input) {
    return Parser(input).parse();
}

std::string escape_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string escape_attr(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

Writer::Writer() {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
}

void Writer::indent() {
    out_.append(stack_.size() * 2, ' ');
}

void Writer::tag_open(std::string_view name, const Attrs& attrs, bool self_close) {
    out_.push_back('<');
    out_.append(name);
    for (const auto& [key, value] : attrs) {
        out_.push_back(' ');
        out_.append(key);
        out_.append("=\"");
        out_.append(escape_attr(value));
        out_.push_back('"');
    }
    if (self_close) out_.push_back('/');
    out_.push_back('>');
}

void Writer::open(std::string_view name, const Attrs& attrs) {
    indent();
    tag_open(name, attrs, false);
    out_.push_back('\n');
    stack_.emplace_back(name);
}

void Writer::close() {
    std::string name = std::move(stack_.back());
    stack_.pop_back();
    indent();
    out_.append("</");
    out_.append(name);
    out_.append(">\n");
}

void Writer::leaf(std::string_view name, const Attrs& attrs, std::string_view text) {
    indent();
    tag_open(name, attrs, false);
    out_.append(escape_text(text));
    out_.append("</");
    out_.append(name);
    out_.append(">\n");
}

void Writer::self_close(std::string_view name, const Attrs& attrs) {
    indent();
    tag_open(name, attrs, true);
    out_.push_back('\n');
}

std::string Writer::take() {
    return std::move(out_);
}

} // namespace tracechain::xml
