#pragma once

#include "foldbox/fssmc.hpp"
#include "foldbox/intnet.hpp"
#include "foldbox/petri.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace foldbox {

using ZeroString = std::vector<std::uint64_t>;

class OddSegmentCount : public SchemaError {
public:
    explicit OddSegmentCount(std::size_t segments)
        : SchemaError("zero-string has " + std::to_string(segments) + " segments; an even number is required")
    {
    }
};

class TrailingGarbage : public SchemaError {
public:
    TrailingGarbage() : SchemaError("zero-string ends with numbers not terminated by 0") {}
};

/// "1,2,0,3,0" ↔ {1,2,0,3,0}. Whitespace around numbers is ignored.
ZeroString parse_zero_string(const std::string& text);
std::string format_zero_string(const ZeroString& z);

/// Segment 2k is the source of generator k + 1, segment 2k + 1 its target.
/// Generating objects are 1..max index, named p1..pn; generators t1..tm.
PresentationRef decode(const ZeroString& z);
ZeroString encode(const Presentation& p);

/// Contents of a .pnz file: the zero-string followed by a newline.
PresentationRef decode_text(const std::string& text);
std::string encode_text(const Presentation& p);

/// Unsigned LEB128 form of the same number sequence.
std::string encode_leb128(const ZeroString& z);
ZeroString decode_leb128(const std::string& bytes);

NetRef presentation_to_net(const Presentation& p);

/// {"objects": [names], "generators": [{"label", "name", "source", "target"}], "pnz"}.
nlohmann::ordered_json presentation_json(const Presentation& p);
/// Reads the same shape; "label" and "pnz" are optional and ignored.
PresentationRef presentation_from_json(const std::string& text);

/// A net file: a net with its current marking, or an integer net, plus named
/// marking predicates.
struct NetDocument {
    bool integer = false;
    NetRef net;
    std::optional<Marking> marking;
    std::shared_ptr<const IntNet> int_net;
    std::optional<IntMarking> int_marking;
    std::map<std::string, std::string> predicates;

    const UniverseRef& places() const;
};

/// Throws SchemaError carrying the offending JSON path, or line and column
/// for syntax errors.
NetDocument read_net_json(const std::string& text);
std::string write_net_json(const NetDocument& doc);

NetDocument make_document(NetRef net, Marking marking);

/// Reads .pnz (zero-string) or JSON by sniffing the first non-blank character.
NetDocument read_net_any(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace foldbox
