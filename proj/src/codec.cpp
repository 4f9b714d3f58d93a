#include "foldbox/codec.hpp"

#include "foldbox/bridge.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace foldbox {

ZeroString parse_zero_string(const std::string& text)
{
    ZeroString out;
    std::size_t i = 0;
    const auto skip_space = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
    };
    skip_space();
    if (i == text.size()) {
        return out;
    }
    while (true) {
        skip_space();
        const auto start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        if (start == i) {
            throw SchemaError("zero-string: expected a number at offset " + std::to_string(start));
        }
        std::uint64_t v = 0;
        const auto res = std::from_chars(text.data() + start, text.data() + i, v);
        if (res.ec != std::errc{}) {
            throw SchemaError("zero-string: number out of range at offset " + std::to_string(start));
        }
        out.push_back(v);
        skip_space();
        if (i == text.size()) {
            break;
        }
        if (text[i] != ',') {
            throw SchemaError("zero-string: expected ',' at offset " + std::to_string(i));
        }
        ++i;
    }
    return out;
}

std::string format_zero_string(const ZeroString& z)
{
    std::string out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(z[i]);
    }
    return out;
}

PresentationRef decode(const ZeroString& z)
{
    std::vector<ObString> segments;
    ObString current;
    std::uint64_t max_index = 0;
    for (auto v : z) {
        if (v == 0) {
            segments.push_back(std::move(current));
            current.clear();
            continue;
        }
        if (v > 0xffffffffULL) {
            throw SchemaError("zero-string: index " + std::to_string(v) + " too large");
        }
        max_index = std::max(max_index, v);
        current.push_back(SymbolId{static_cast<std::uint32_t>(v)});
    }
    if (!current.empty()) {
        throw TrailingGarbage();
    }
    if (segments.size() % 2 != 0) {
        throw OddSegmentCount(segments.size());
    }
    std::vector<GenDecl> gens;
    for (std::size_t k = 0; k < segments.size(); k += 2) {
        const auto id = static_cast<std::uint32_t>(k / 2 + 1);
        gens.push_back(GenDecl{GeneratorId{id}, "t" + std::to_string(id), segments[k], segments[k + 1]});
    }
    return std::make_shared<const Presentation>(make_universe(max_index), std::move(gens));
}

ZeroString encode(const Presentation& p)
{
    ZeroString out;
    for (const auto& g : p.generators()) {
        for (auto s : g.source) {
            out.push_back(s.value);
        }
        out.push_back(0);
        for (auto s : g.target) {
            out.push_back(s.value);
        }
        out.push_back(0);
    }
    return out;
}

PresentationRef decode_text(const std::string& text)
{
    return decode(parse_zero_string(text));
}

std::string encode_text(const Presentation& p)
{
    return format_zero_string(encode(p)) + "\n";
}

std::string encode_leb128(const ZeroString& z)
{
    std::string out;
    for (auto v : z) {
        do {
            auto byte = static_cast<unsigned char>(v & 0x7fU);
            v >>= 7U;
            if (v != 0) {
                byte |= 0x80U;
            }
            out.push_back(static_cast<char>(byte));
        } while (v != 0);
    }
    return out;
}

ZeroString decode_leb128(const std::string& bytes)
{
    ZeroString out;
    std::uint64_t value = 0;
    unsigned shift = 0;
    bool pending = false;
    for (char c : bytes) {
        const auto byte = static_cast<unsigned char>(c);
        if (shift >= 64 || (shift == 63 && (byte & 0x7eU) != 0)) {
            throw SchemaError("LEB128: value exceeds 64 bits");
        }
        value |= static_cast<std::uint64_t>(byte & 0x7fU) << shift;
        pending = true;
        if ((byte & 0x80U) != 0) {
            shift += 7;
            continue;
        }
        out.push_back(value);
        value = 0;
        shift = 0;
        pending = false;
    }
    if (pending) {
        throw SchemaError("LEB128: truncated final value");
    }
    return out;
}

NetRef presentation_to_net(const Presentation& p)
{
    return unfold(p);
}

// JSON ----------------------------------------------------------------------

nlohmann::ordered_json presentation_json(const Presentation& p)
{
    const auto& u = *p.objects();
    const auto names = [&](const ObString& w) {
        auto j = nlohmann::ordered_json::array();
        for (auto s : w) {
            j.push_back(u.name(s));
        }
        return j;
    };
    nlohmann::ordered_json j;
    j["objects"] = u.names();
    auto gens = nlohmann::ordered_json::array();
    for (const auto& g : p.generators()) {
        gens.push_back({{"label", g.id.value},
                        {"name", g.name.empty() ? "t" + std::to_string(g.id.value) : g.name},
                        {"source", names(g.source)},
                        {"target", names(g.target)}});
    }
    j["generators"] = std::move(gens);
    j["pnz"] = format_zero_string(encode(p));
    return j;
}

PresentationRef presentation_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("presentation: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("objects") || !j["objects"].is_array() || !j.contains("generators") ||
        !j["generators"].is_array()) {
        throw SchemaError("presentation: expected {\"objects\": [...], \"generators\": [...]}");
    }
    std::vector<std::string> names;
    for (const auto& o : j["objects"]) {
        if (!o.is_string()) {
            throw SchemaError("presentation: object names must be strings");
        }
        names.push_back(o.get<std::string>());
    }
    const auto u = make_universe(std::move(names));
    const auto word = [&](const nlohmann::json& w, const std::string& where) {
        if (!w.is_array()) {
            throw SchemaError("presentation: " + where + " must be an array of object names");
        }
        ObString out;
        for (const auto& s : w) {
            const auto id = s.is_string() ? u->find(s.get<std::string>()) : std::nullopt;
            if (!id) {
                throw SchemaError("presentation: unknown object " + s.dump() + " in " + where);
            }
            out.push_back(*id);
        }
        return out;
    };
    std::vector<GenDecl> gens;
    for (std::size_t i = 0; i < j["generators"].size(); ++i) {
        const auto& g = j["generators"][i];
        const auto where = "generator " + std::to_string(i + 1);
        if (!g.is_object() || !g.contains("source") || !g.contains("target")) {
            throw SchemaError("presentation: " + where + " needs \"source\" and \"target\"");
        }
        const auto id = static_cast<std::uint32_t>(i + 1);
        std::string name = "t" + std::to_string(id);
        if (g.contains("name")) {
            if (!g["name"].is_string()) {
                throw SchemaError("presentation: " + where + " name must be a string");
            }
            name = g["name"].get<std::string>();
        }
        gens.push_back(GenDecl{GeneratorId{id}, name, word(g["source"], where), word(g["target"], where)});
    }
    return std::make_shared<const Presentation>(u, std::move(gens));
}

const UniverseRef& NetDocument::places() const
{
    return integer ? int_net->places() : net->places();
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw SchemaError((path.empty() ? std::string("/") : path) + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path)
{
    const auto it = obj.find(key);
    if (it == obj.end()) {
        fail(path, "missing field \"" + key + "\"");
    }
    return *it;
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path)
{
    for (const auto& [k, v] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
            fail(path, "unexpected field \"" + k + "\"");
        }
    }
}

std::string escape_pointer(const std::string& key)
{
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

std::map<SymbolId, IntCount> read_weights(const json& j, const Universe& places, bool integer, const std::string& path)
{
    if (!j.is_object()) {
        fail(path, "expected an object mapping place names to counts");
    }
    std::map<SymbolId, IntCount> out;
    for (const auto& [name, v] : j.items()) {
        const auto sub = path + "/" + escape_pointer(name);
        const auto p = places.find(name);
        if (!p) {
            fail(sub, "unknown place \"" + name + "\"");
        }
        if (!v.is_number_integer()) {
            fail(sub, "expected an integer");
        }
        if (!integer && v.is_number_unsigned() == false && v.get<std::int64_t>() < 0) {
            fail(sub, "negative counts need \"integer\": true");
        }
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
            fail(sub, "count too large");
        }
        out[*p] = v.get<std::int64_t>();
    }
    return out;
}

Multiset to_multiset(const UniverseRef& u, const std::map<SymbolId, IntCount>& w)
{
    std::map<SymbolId, Count> counts;
    for (const auto& [p, n] : w) {
        counts[p] = static_cast<Count>(n);
    }
    return Multiset(u, std::move(counts));
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

NetDocument read_net_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw SchemaError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": invalid JSON");
    }
    if (!j.is_object()) {
        fail("", "expected a JSON object");
    }
    only_keys(j, {"places", "transitions", "marking", "integer", "predicates"}, "");

    bool integer = false;
    if (const auto it = j.find("integer"); it != j.end()) {
        if (!it->is_boolean()) {
            fail("/integer", "expected a boolean");
        }
        integer = it->get<bool>();
    }

    const auto& jp = require(j, "places", "");
    if (!jp.is_array()) {
        fail("/places", "expected an array of place names");
    }
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < jp.size(); ++i) {
        const auto path = "/places/" + std::to_string(i);
        if (!jp[i].is_string() || jp[i].get<std::string>().empty()) {
            fail(path, "expected a non-empty string");
        }
        const auto name = jp[i].get<std::string>();
        if (!seen.insert(name).second) {
            fail(path, "duplicate place \"" + name + "\"");
        }
        names.push_back(name);
    }
    const auto places = make_universe(std::move(names));

    const auto& jt = require(j, "transitions", "");
    if (!jt.is_array()) {
        fail("/transitions", "expected an array");
    }
    std::vector<IntTransition> ts;
    std::set<std::string> tnames;
    for (std::size_t i = 0; i < jt.size(); ++i) {
        const auto path = "/transitions/" + std::to_string(i);
        const auto& t = jt[i];
        if (!t.is_object()) {
            fail(path, "expected an object");
        }
        only_keys(t, {"name", "input", "output"}, path);
        const auto& jn = require(t, "name", path);
        if (!jn.is_string() || jn.get<std::string>().empty()) {
            fail(path + "/name", "expected a non-empty string");
        }
        const auto name = jn.get<std::string>();
        if (!tnames.insert(name).second) {
            fail(path + "/name", "duplicate transition \"" + name + "\"");
        }
        ts.push_back(IntTransition{name, read_weights(require(t, "input", path), *places, integer, path + "/input"),
                                   read_weights(require(t, "output", path), *places, integer, path + "/output")});
    }

    std::map<SymbolId, IntCount> marking;
    if (const auto it = j.find("marking"); it != j.end()) {
        marking = read_weights(*it, *places, integer, "/marking");
    }

    NetDocument doc;
    doc.integer = integer;
    if (const auto it = j.find("predicates"); it != j.end()) {
        if (!it->is_object()) {
            fail("/predicates", "expected an object mapping names to predicate text");
        }
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) {
                fail("/predicates/" + escape_pointer(k), "expected a string");
            }
            doc.predicates[k] = v.get<std::string>();
        }
    }
    if (integer) {
        doc.int_net = std::make_shared<const IntNet>(places, std::move(ts));
        IntMarking m(places->size());
        for (const auto& [p, n] : marking) {
            m.set(p, n);
        }
        doc.int_marking = std::move(m);
    } else {
        std::vector<Transition> nts;
        for (const auto& t : ts) {
            nts.push_back(Transition{t.name, to_multiset(places, t.input), to_multiset(places, t.output)});
        }
        doc.net = std::make_shared<const Net>(places, std::move(nts));
        doc.marking = Marking(to_multiset(places, marking));
    }
    return doc;
}

namespace {

template <class Weights, class Get>
ordered_json write_weights(const Universe& places, const Weights& w, Get get)
{
    ordered_json out = ordered_json::object();
    for (auto p : places.symbols()) {
        const auto n = get(w, p);
        if (n != 0) {
            out[places.name(p)] = n;
        }
    }
    return out;
}

} // namespace

std::string write_net_json(const NetDocument& doc)
{
    const auto& places = *doc.places();
    ordered_json j;
    j["places"] = places.names();
    auto ts = ordered_json::array();
    const auto int_get = [](const std::map<SymbolId, IntCount>& w, SymbolId p) -> IntCount {
        const auto it = w.find(p);
        return it == w.end() ? 0 : it->second;
    };
    const auto ms_get = [](const Multiset& m, SymbolId p) -> Count { return m.count(p); };
    if (doc.integer) {
        for (const auto& t : doc.int_net->transitions()) {
            ordered_json jt;
            jt["name"] = t.name;
            jt["input"] = write_weights(places, t.input, int_get);
            jt["output"] = write_weights(places, t.output, int_get);
            ts.push_back(std::move(jt));
        }
    } else {
        for (const auto& t : doc.net->transitions()) {
            ordered_json jt;
            jt["name"] = t.name;
            jt["input"] = write_weights(places, t.input, ms_get);
            jt["output"] = write_weights(places, t.output, ms_get);
            ts.push_back(std::move(jt));
        }
    }
    j["transitions"] = std::move(ts);
    if (doc.integer) {
        j["marking"] = write_weights(places, *doc.int_marking,
                                     [](const IntMarking& m, SymbolId p) -> IntCount { return m[p]; });
        j["integer"] = true;
    } else {
        j["marking"] = write_weights(places, doc.marking->tokens(), ms_get);
    }
    if (!doc.predicates.empty()) {
        j["predicates"] = doc.predicates;
    }
    return j.dump(2) + "\n";
}

NetDocument make_document(NetRef net, Marking marking)
{
    if (!(*marking.tokens().universe() == *net->places())) {
        throw UniverseMismatch();
    }
    NetDocument doc;
    doc.net = std::move(net);
    doc.marking = std::move(marking);
    return doc;
}

NetDocument read_net_any(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        return read_net_json(text);
    }
    const auto net = presentation_to_net(*decode_text(text));
    return make_document(net, empty_marking(*net));
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write " + path);
    }
    out << contents;
    if (!out) {
        throw UsageError("failed writing " + path);
    }
}

} // namespace foldbox
