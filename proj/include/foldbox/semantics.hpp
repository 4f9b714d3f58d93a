#pragma once

#include "foldbox/bridge.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace foldbox {

class ValueType {
public:
    enum class Tag { unit, boolean, integer, int_list, text, pair };

    static ValueType unit() { return ValueType(Tag::unit); }
    static ValueType boolean() { return ValueType(Tag::boolean); }
    static ValueType integer() { return ValueType(Tag::integer); }
    static ValueType int_list() { return ValueType(Tag::int_list); }
    static ValueType text() { return ValueType(Tag::text); }
    static ValueType pair(ValueType first, ValueType second);

    Tag tag() const { return tag_; }
    const ValueType& first() const;
    const ValueType& second() const;

    bool operator==(const ValueType& other) const;

private:
    explicit ValueType(Tag tag) : tag_(tag) {}

    Tag tag_;
    std::shared_ptr<const std::pair<ValueType, ValueType>> parts_;
};

/// "unit", "bool", "int", "intlist", "text", "pair(int,bool)".
std::string to_string(const ValueType& t);
ValueType parse_value_type(const std::string& text);

class Value {
public:
    static Value unit();
    static Value boolean(bool b);
    static Value integer(std::int64_t n);
    static Value int_list(std::vector<std::int64_t> xs);
    static Value text(std::string s);
    static Value pair(Value first, Value second);
    /// The default inhabitant: (), false, 0, [], "", and pairs thereof.
    static Value default_of(const ValueType& t);

    ValueType::Tag tag() const { return tag_; }
    bool as_bool() const;
    std::int64_t as_int() const;
    const std::vector<std::int64_t>& as_list() const;
    const std::string& as_text() const;
    const Value& first() const;
    const Value& second() const;

    bool has_type(const ValueType& t) const;
    bool operator==(const Value& other) const;

private:
    ValueType::Tag tag_ = ValueType::Tag::unit;
    bool b_ = false;
    std::int64_t n_ = 0;
    std::vector<std::int64_t> list_;
    std::string text_;
    std::shared_ptr<const std::pair<Value, Value>> parts_;
};

using Values = std::vector<Value>;

/// Unit ↦ null, Bool ↦ true/false, Int ↦ number, IntList ↦ array, Text ↦
/// string, Pair ↦ two-element array. Reading needs the expected type.
nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j, const ValueType& t);

class TypeError : public UsageError {
public:
    using UsageError::UsageError;
};

class SignatureMismatch : public UsageError {
public:
    SignatureMismatch(GeneratorId label, const std::string& detail);
    GeneratorId label() const { return label_; }

private:
    GeneratorId label_;
};

class FunctionFailure : public Error {
public:
    FunctionFailure(GeneratorId label, const std::string& detail);
    GeneratorId label() const { return label_; }

private:
    GeneratorId label_;
};

/// A named family of functions. `accepts` decides whether the builtin can
/// realize a given signature. `run` maps input values to values of the
/// requested output types.
struct Builtin {
    std::string name;
    bool pure = true;
    std::function<bool(const std::vector<ValueType>&, const std::vector<ValueType>&)> accepts;
    std::function<Values(const Values&, const std::vector<ValueType>&)> run;
};

class BuiltinRegistry {
public:
    void add(Builtin b);
    const Builtin& lookup(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Builtin> builtins_;
};

/// increment, double, identity, quicksort, concat, const.
const BuiltinRegistry& builtin_registry();

/// Reference quicksort with the first element as pivot.
std::vector<std::int64_t> quicksort(const std::vector<std::int64_t>& xs);

struct FunctionBinding {
    std::string function;
    bool total = true;
};

/// A strict symmetric monoidal functor from Fold(N) to typed functions:
/// a value type per place and a builtin per generator.
struct FoldBinding {
    PresentationRef presentation;
    std::vector<ValueType> place_types;
    std::vector<std::optional<FunctionBinding>> functions;
    std::chrono::milliseconds budget{1000};
};

std::vector<ValueType> types_of(const FoldBinding& b, const ObString& w);

/// Throws SignatureMismatch for the first generator whose function is
/// missing, unknown or does not accept its typed signature.
void validate_binding(const FoldBinding& b, const BuiltinRegistry& registry = builtin_registry());

/// Evaluates the string diagram of t on the given values.
Values run_term(const FoldBinding& b, const Term& t, const Values& inputs,
                const BuiltinRegistry& registry = builtin_registry());
Values run_history(const FoldBinding& b, const History& h, const Values& inputs,
                   const BuiltinRegistry& registry = builtin_registry());

/// {"places": {"p1": "intlist"}, "transitions": {"t": "quicksort"}}. Keys may
/// be names or 1-based indices; a transition entry may also be
/// {"function": name, "total": bool}.
FoldBinding read_binding_json(const std::string& text, PresentationRef p);
std::string write_binding_json(const FoldBinding& b);

Values values_from_json(const nlohmann::json& j, const std::vector<ValueType>& types);
nlohmann::json values_to_json(const Values& vs);

} // namespace foldbox
