#include "foldbox/semantics.hpp"

#include <algorithm>
#include <cctype>

namespace foldbox {

ValueType ValueType::pair(ValueType first, ValueType second)
{
    ValueType t(Tag::pair);
    t.parts_ = std::make_shared<const std::pair<ValueType, ValueType>>(std::move(first), std::move(second));
    return t;
}

const ValueType& ValueType::first() const
{
    if (tag_ != Tag::pair) {
        throw TypeError("not a pair type");
    }
    return parts_->first;
}

const ValueType& ValueType::second() const
{
    if (tag_ != Tag::pair) {
        throw TypeError("not a pair type");
    }
    return parts_->second;
}

bool ValueType::operator==(const ValueType& other) const
{
    if (tag_ != other.tag_) {
        return false;
    }
    return tag_ != Tag::pair || (first() == other.first() && second() == other.second());
}

std::string to_string(const ValueType& t)
{
    switch (t.tag()) {
    case ValueType::Tag::unit: return "unit";
    case ValueType::Tag::boolean: return "bool";
    case ValueType::Tag::integer: return "int";
    case ValueType::Tag::int_list: return "intlist";
    case ValueType::Tag::text: return "text";
    case ValueType::Tag::pair: return "pair(" + to_string(t.first()) + "," + to_string(t.second()) + ")";
    }
    return "unit";
}

namespace {

ValueType parse_type_at(const std::string& s, std::size_t& i)
{
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
    }
    const auto start = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
        ++i;
    }
    const auto word = s.substr(start, i - start);
    const auto expect = [&](char c) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i >= s.size() || s[i] != c) {
            throw SchemaError("value type \"" + s + "\": expected '" + std::string(1, c) + "' at offset " +
                              std::to_string(i));
        }
        ++i;
    };
    if (word == "unit") {
        return ValueType::unit();
    }
    if (word == "bool") {
        return ValueType::boolean();
    }
    if (word == "int") {
        return ValueType::integer();
    }
    if (word == "intlist") {
        return ValueType::int_list();
    }
    if (word == "text") {
        return ValueType::text();
    }
    if (word == "pair") {
        expect('(');
        auto a = parse_type_at(s, i);
        expect(',');
        auto b = parse_type_at(s, i);
        expect(')');
        return ValueType::pair(std::move(a), std::move(b));
    }
    throw SchemaError("unknown value type \"" + word + "\"");
}

} // namespace

ValueType parse_value_type(const std::string& text)
{
    std::size_t i = 0;
    auto t = parse_type_at(text, i);
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
        ++i;
    }
    if (i != text.size()) {
        throw SchemaError("value type \"" + text + "\": trailing input");
    }
    return t;
}

// Values ---------------------------------------------------------------------

Value Value::unit()
{
    return Value{};
}

Value Value::boolean(bool b)
{
    Value v;
    v.tag_ = ValueType::Tag::boolean;
    v.b_ = b;
    return v;
}

Value Value::integer(std::int64_t n)
{
    Value v;
    v.tag_ = ValueType::Tag::integer;
    v.n_ = n;
    return v;
}

Value Value::int_list(std::vector<std::int64_t> xs)
{
    Value v;
    v.tag_ = ValueType::Tag::int_list;
    v.list_ = std::move(xs);
    return v;
}

Value Value::text(std::string s)
{
    Value v;
    v.tag_ = ValueType::Tag::text;
    v.text_ = std::move(s);
    return v;
}

Value Value::pair(Value first, Value second)
{
    Value v;
    v.tag_ = ValueType::Tag::pair;
    v.parts_ = std::make_shared<const std::pair<Value, Value>>(std::move(first), std::move(second));
    return v;
}

Value Value::default_of(const ValueType& t)
{
    switch (t.tag()) {
    case ValueType::Tag::unit: return unit();
    case ValueType::Tag::boolean: return boolean(false);
    case ValueType::Tag::integer: return integer(0);
    case ValueType::Tag::int_list: return int_list({});
    case ValueType::Tag::text: return text("");
    case ValueType::Tag::pair: return pair(default_of(t.first()), default_of(t.second()));
    }
    return unit();
}

namespace {

void want(const Value& v, ValueType::Tag tag)
{
    if (v.tag() != tag) {
        throw TypeError("value has the wrong type");
    }
}

} // namespace

bool Value::as_bool() const
{
    want(*this, ValueType::Tag::boolean);
    return b_;
}

std::int64_t Value::as_int() const
{
    want(*this, ValueType::Tag::integer);
    return n_;
}

const std::vector<std::int64_t>& Value::as_list() const
{
    want(*this, ValueType::Tag::int_list);
    return list_;
}

const std::string& Value::as_text() const
{
    want(*this, ValueType::Tag::text);
    return text_;
}

const Value& Value::first() const
{
    want(*this, ValueType::Tag::pair);
    return parts_->first;
}

const Value& Value::second() const
{
    want(*this, ValueType::Tag::pair);
    return parts_->second;
}

bool Value::has_type(const ValueType& t) const
{
    if (tag_ != t.tag()) {
        return false;
    }
    return tag_ != ValueType::Tag::pair || (first().has_type(t.first()) && second().has_type(t.second()));
}

bool Value::operator==(const Value& other) const
{
    if (tag_ != other.tag_) {
        return false;
    }
    switch (tag_) {
    case ValueType::Tag::unit: return true;
    case ValueType::Tag::boolean: return b_ == other.b_;
    case ValueType::Tag::integer: return n_ == other.n_;
    case ValueType::Tag::int_list: return list_ == other.list_;
    case ValueType::Tag::text: return text_ == other.text_;
    case ValueType::Tag::pair: return first() == other.first() && second() == other.second();
    }
    return false;
}

nlohmann::json value_to_json(const Value& v)
{
    switch (v.tag()) {
    case ValueType::Tag::unit: return nullptr;
    case ValueType::Tag::boolean: return v.as_bool();
    case ValueType::Tag::integer: return v.as_int();
    case ValueType::Tag::int_list: return v.as_list();
    case ValueType::Tag::text: return v.as_text();
    case ValueType::Tag::pair: return nlohmann::json::array({value_to_json(v.first()), value_to_json(v.second())});
    }
    return nullptr;
}

Value value_from_json(const nlohmann::json& j, const ValueType& t)
{
    const auto bad = [&] { return TypeError("expected a value of type " + to_string(t) + ", got " + j.dump()); };
    switch (t.tag()) {
    case ValueType::Tag::unit:
        if (!j.is_null()) {
            throw bad();
        }
        return Value::unit();
    case ValueType::Tag::boolean:
        if (!j.is_boolean()) {
            throw bad();
        }
        return Value::boolean(j.get<bool>());
    case ValueType::Tag::integer:
        if (!j.is_number_integer() ||
            (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))) {
            throw bad();
        }
        return Value::integer(j.get<std::int64_t>());
    case ValueType::Tag::int_list: {
        if (!j.is_array()) {
            throw bad();
        }
        std::vector<std::int64_t> xs;
        for (const auto& e : j) {
            xs.push_back(value_from_json(e, ValueType::integer()).as_int());
        }
        return Value::int_list(std::move(xs));
    }
    case ValueType::Tag::text:
        if (!j.is_string()) {
            throw bad();
        }
        return Value::text(j.get<std::string>());
    case ValueType::Tag::pair:
        if (!j.is_array() || j.size() != 2) {
            throw bad();
        }
        return Value::pair(value_from_json(j[0], t.first()), value_from_json(j[1], t.second()));
    }
    throw bad();
}

Values values_from_json(const nlohmann::json& j, const std::vector<ValueType>& types)
{
    if (!j.is_array() || j.size() != types.size()) {
        throw TypeError("expected an array of " + std::to_string(types.size()) + " token values");
    }
    Values out;
    for (std::size_t i = 0; i < types.size(); ++i) {
        out.push_back(value_from_json(j[i], types[i]));
    }
    return out;
}

nlohmann::json values_to_json(const Values& vs)
{
    auto j = nlohmann::json::array();
    for (const auto& v : vs) {
        j.push_back(value_to_json(v));
    }
    return j;
}

// Errors ---------------------------------------------------------------------

SignatureMismatch::SignatureMismatch(GeneratorId label, const std::string& detail)
    : UsageError("signature mismatch for generator " + std::to_string(label.value) + ": " + detail), label_(label)
{
}

FunctionFailure::FunctionFailure(GeneratorId label, const std::string& detail)
    : Error("function for generator " + std::to_string(label.value) + " failed: " + detail), label_(label)
{
}

// Builtins -------------------------------------------------------------------

void BuiltinRegistry::add(Builtin b)
{
    auto name = b.name;
    builtins_.insert_or_assign(std::move(name), std::move(b));
}

const Builtin& BuiltinRegistry::lookup(const std::string& name) const
{
    const auto it = builtins_.find(name);
    if (it == builtins_.end()) {
        throw UnknownId("unknown function \"" + name + "\"");
    }
    return it->second;
}

bool BuiltinRegistry::contains(const std::string& name) const
{
    return builtins_.contains(name);
}

std::vector<std::string> BuiltinRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : builtins_) {
        out.push_back(k);
    }
    return out;
}

std::vector<std::int64_t> quicksort(const std::vector<std::int64_t>& xs)
{
    if (xs.empty()) {
        return {};
    }
    const auto p = xs.front();
    std::vector<std::int64_t> lesser;
    std::vector<std::int64_t> greater;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        (xs[i] < p ? lesser : greater).push_back(xs[i]);
    }
    auto out = quicksort(lesser);
    out.push_back(p);
    const auto rest = quicksort(greater);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

namespace {

using Types = std::vector<ValueType>;

Builtin unary_int(const std::string& name, std::int64_t (*f)(std::int64_t))
{
    return Builtin{name, true,
                   [](const Types& in, const Types& out) {
                       return in == Types{ValueType::integer()} && out == Types{ValueType::integer()};
                   },
                   [f](const Values& in, const Types&) { return Values{Value::integer(f(in[0].as_int()))}; }};
}

std::int64_t increment(std::int64_t x)
{
    std::int64_t r = 0;
    if (__builtin_add_overflow(x, 1, &r)) {
        throw Overflow();
    }
    return r;
}

std::int64_t twice(std::int64_t x)
{
    std::int64_t r = 0;
    if (__builtin_mul_overflow(x, 2, &r)) {
        throw Overflow();
    }
    return r;
}

BuiltinRegistry make_registry()
{
    BuiltinRegistry r;
    r.add(unary_int("increment", increment));
    r.add(unary_int("double", twice));
    r.add(Builtin{"identity", true, [](const Types& in, const Types& out) { return in == out; },
                  [](const Values& in, const Types&) { return in; }});
    r.add(Builtin{"quicksort", true,
                  [](const Types& in, const Types& out) {
                      return in == Types{ValueType::int_list()} && out == Types{ValueType::int_list()};
                  },
                  [](const Values& in, const Types&) { return Values{Value::int_list(quicksort(in[0].as_list()))}; }});
    r.add(Builtin{"concat", true,
                  [](const Types& in, const Types& out) {
                      if (out.size() != 1 || in.empty()) {
                          return false;
                      }
                      const auto tag = out[0].tag();
                      if (tag != ValueType::Tag::int_list && tag != ValueType::Tag::text) {
                          return false;
                      }
                      return std::ranges::all_of(in, [&](const ValueType& t) { return t == out[0]; });
                  },
                  [](const Values& in, const Types& out) {
                      if (out[0].tag() == ValueType::Tag::text) {
                          std::string s;
                          for (const auto& v : in) {
                              s += v.as_text();
                          }
                          return Values{Value::text(std::move(s))};
                      }
                      std::vector<std::int64_t> xs;
                      for (const auto& v : in) {
                          xs.insert(xs.end(), v.as_list().begin(), v.as_list().end());
                      }
                      return Values{Value::int_list(std::move(xs))};
                  }});
    r.add(Builtin{"const", true, [](const Types&, const Types&) { return true; },
                  [](const Values&, const Types& out) {
                      Values vs;
                      for (const auto& t : out) {
                          vs.push_back(Value::default_of(t));
                      }
                      return vs;
                  }});
    return r;
}

} // namespace

const BuiltinRegistry& builtin_registry()
{
    static const BuiltinRegistry registry = make_registry();
    return registry;
}

// Bindings -------------------------------------------------------------------

std::vector<ValueType> types_of(const FoldBinding& b, const ObString& w)
{
    std::vector<ValueType> out;
    for (auto s : w) {
        if (!s.valid() || s.value > b.place_types.size()) {
            throw UnknownId("no value type for place " + std::to_string(s.value));
        }
        out.push_back(b.place_types[s.index()]);
    }
    return out;
}

void validate_binding(const FoldBinding& b, const BuiltinRegistry& registry)
{
    const auto& p = *b.presentation;
    if (b.place_types.size() != p.object_count()) {
        throw TypeError("binding types " + std::to_string(b.place_types.size()) + " places, the net has " +
                        std::to_string(p.object_count()));
    }
    if (b.functions.size() != p.generator_count()) {
        throw TypeError("binding covers " + std::to_string(b.functions.size()) + " transitions, the net has " +
                        std::to_string(p.generator_count()));
    }
    for (const auto& g : p.generators()) {
        const auto& f = b.functions[g.id.index()];
        if (!f) {
            throw SignatureMismatch(g.id, "no function bound");
        }
        if (!registry.contains(f->function)) {
            throw SignatureMismatch(g.id, "unknown function \"" + f->function + "\"");
        }
        if (!registry.lookup(f->function).accepts(types_of(b, g.source), types_of(b, g.target))) {
            throw SignatureMismatch(g.id, "\"" + f->function + "\" does not accept the generator's types");
        }
    }
}

Values run_term(const FoldBinding& b, const Term& t, const Values& inputs, const BuiltinRegistry& registry)
{
    const auto in_types = types_of(b, t.dom());
    if (inputs.size() != in_types.size()) {
        throw TypeError("expected " + std::to_string(in_types.size()) + " input values, got " +
                        std::to_string(inputs.size()));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].has_type(in_types[i])) {
            throw TypeError("input " + std::to_string(i) + " is not of type " + to_string(in_types[i]));
        }
    }
    const Diagram d = to_diagram(t);
    std::vector<Values> produced(d.boxes.size());
    const auto read = [&](const PortRef& r) -> const Value& {
        return r.is_boundary() ? inputs[r.port] : produced[r.box][r.port];
    };
    for (std::size_t k = 0; k < d.boxes.size(); ++k) {
        const auto& box = d.boxes[k];
        const auto& f = b.functions.at(box.label.index());
        if (!f) {
            throw SignatureMismatch(box.label, "no function bound");
        }
        const auto& builtin = registry.lookup(f->function);
        Values args;
        for (const auto& src : box.sources) {
            args.push_back(read(src));
        }
        const auto out_types = types_of(b, box.outputs);
        const auto started = std::chrono::steady_clock::now();
        Values result;
        try {
            result = builtin.run(args, out_types);
        } catch (const std::exception& e) {
            throw FunctionFailure(box.label, e.what());
        }
        if (std::chrono::steady_clock::now() - started > b.budget) {
            throw FunctionFailure(box.label, "exceeded its time budget of " + std::to_string(b.budget.count()) + " ms");
        }
        if (result.size() != out_types.size()) {
            throw FunctionFailure(box.label, "returned " + std::to_string(result.size()) + " values, expected " +
                                                 std::to_string(out_types.size()));
        }
        for (std::size_t i = 0; i < result.size(); ++i) {
            if (!result[i].has_type(out_types[i])) {
                throw FunctionFailure(box.label, "output " + std::to_string(i) + " is not of type " +
                                                     to_string(out_types[i]));
            }
        }
        produced[k] = std::move(result);
    }
    Values out;
    for (const auto& o : d.outputs) {
        out.push_back(read(o));
    }
    return out;
}

Values run_history(const FoldBinding& b, const History& h, const Values& inputs, const BuiltinRegistry& registry)
{
    if (!(*b.presentation == *h.presentation())) {
        throw UsageError("binding and history belong to different nets");
    }
    return run_term(b, h.term(), inputs, registry);
}

namespace {

template <class Find>
std::size_t resolve_key(const std::string& key, std::size_t count, Find find, const std::string& what)
{
    if (const auto id = find(key)) {
        return *id;
    }
    if (!key.empty() && std::ranges::all_of(key, [](unsigned char c) { return std::isdigit(c) != 0; })) {
        const auto n = std::stoull(key);
        if (n >= 1 && n <= count) {
            return n - 1;
        }
    }
    throw SchemaError("binding: unknown " + what + " \"" + key + "\"");
}

} // namespace

FoldBinding read_binding_json(const std::string& text, PresentationRef p)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("binding: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw SchemaError("binding: expected a JSON object");
    }
    FoldBinding b;
    b.presentation = p;
    const auto& objects = *p->objects();
    std::vector<std::optional<ValueType>> types(p->object_count());
    if (const auto it = j.find("places"); it != j.end()) {
        if (!it->is_object()) {
            throw SchemaError("binding: \"places\" must be an object");
        }
        for (const auto& [k, v] : it->items()) {
            const auto i = resolve_key(
                k, types.size(), [&](const std::string& n) -> std::optional<std::size_t> {
                    if (auto s = objects.find(n)) {
                        return s->index();
                    }
                    return std::nullopt;
                },
                "place");
            if (!v.is_string()) {
                throw SchemaError("binding: type of place \"" + k + "\" must be a string");
            }
            types[i] = parse_value_type(v.get<std::string>());
        }
    }
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (!types[i]) {
            throw SchemaError("binding: place \"" + objects.names()[i] + "\" has no value type");
        }
        b.place_types.push_back(*types[i]);
    }
    b.functions.resize(p->generator_count());
    if (const auto it = j.find("transitions"); it != j.end()) {
        if (!it->is_object()) {
            throw SchemaError("binding: \"transitions\" must be an object");
        }
        for (const auto& [k, v] : it->items()) {
            const auto i = resolve_key(
                k, b.functions.size(), [&](const std::string& n) -> std::optional<std::size_t> {
                    if (auto g = p->find_generator(n)) {
                        return g->index();
                    }
                    return std::nullopt;
                },
                "transition");
            FunctionBinding fb;
            if (v.is_string()) {
                fb.function = v.get<std::string>();
            } else if (v.is_object() && v.contains("function") && v["function"].is_string()) {
                fb.function = v["function"].get<std::string>();
                if (v.contains("total")) {
                    if (!v["total"].is_boolean()) {
                        throw SchemaError("binding: \"total\" must be a boolean");
                    }
                    fb.total = v["total"].get<bool>();
                }
            } else {
                throw SchemaError("binding: transition \"" + k + "\" needs a function name");
            }
            b.functions[i] = std::move(fb);
        }
    }
    if (const auto it = j.find("budget_ms"); it != j.end()) {
        if (!it->is_number_unsigned()) {
            throw SchemaError("binding: \"budget_ms\" must be a non-negative integer");
        }
        b.budget = std::chrono::milliseconds(it->get<std::uint64_t>());
    }
    return b;
}

std::string write_binding_json(const FoldBinding& b)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json places = nlohmann::ordered_json::object();
    const auto& objects = *b.presentation->objects();
    for (std::size_t i = 0; i < b.place_types.size(); ++i) {
        places[objects.names()[i]] = to_string(b.place_types[i]);
    }
    j["places"] = std::move(places);
    nlohmann::ordered_json ts = nlohmann::ordered_json::object();
    for (const auto& g : b.presentation->generators()) {
        const auto& f = b.functions[g.id.index()];
        if (!f) {
            continue;
        }
        const auto key = g.name.empty() ? std::to_string(g.id.value) : g.name;
        if (f->total) {
            ts[key] = f->function;
        } else {
            ts[key] = {{"function", f->function}, {"total", false}};
        }
    }
    j["transitions"] = std::move(ts);
    if (b.budget != std::chrono::milliseconds(1000)) {
        j["budget_ms"] = b.budget.count();
    }
    return j.dump(2) + "\n";
}

} // namespace foldbox
