#pragma once

// Internal canonical-XML subset: writer emits the exact byte form the record
// and identity files are hashed over; the parser tolerates cosmetic variation
// so callers can diagnose NonCanonical by re-serializing and comparing.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracechain::xml {

using Attrs = std::vector<std::pair<std::string, std::string>>;

struct Element {
    std::string name;
    Attrs attrs;
    std::vector<Element> children;
    std::string text; // meaningful only when children is empty

    const Element* child(std::string_view name) const;
    const std::string* attr(std::string_view name) const;
};

/// Parse one document: optional declaration, comments tolerated, exactly one
/// root. Only the five predefined entities. Throws Errc::malformed_xml.
Element parse_document(std::string_view input);

std::string escape_text(std::string_view raw);
std::string escape_attr(std::string_view raw);

/// Emits `<?xml version="1.0" encoding="UTF-8"?>`, LF endings, 2-space
/// indent, one element per line, file ends with LF.
class Writer {
public:
    Writer();

    void open(std::string_view name, const Attrs& attrs = {});
    void close();
    void leaf(std::string_view name, const Attrs& attrs, std::string_view text);
    void self_close(std::string_view name, const Attrs& attrs);

    std::string take();

private:
    std::string out_;
    std::vector<std::string> stack_;

    void indent();
    void tag_open(std::string_view name, const Attrs& attrs, bool self_close);
};

} // namespace tracechain::xml
