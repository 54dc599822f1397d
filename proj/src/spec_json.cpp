#include "blowup/spec_json.hpp"

#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"

namespace blowup {

namespace {

double number(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number())
        fail(ErrorCode::Domain, fmt::format("spec key '{}' must be a number", key));
    return v.get<double>();
}

} // namespace

NonlinearitySpec parse_spec(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Domain, fmt::format("spec is not valid JSON: {}", e.what()));
    }
    if (!j.is_object())
        fail(ErrorCode::Domain, "spec must be a JSON object");
    if (!j.contains("p"))
        fail(ErrorCode::Domain, "spec needs key 'p'");

    const std::string variant = j.value("variant", std::string("UnitH"));
    std::set<std::string> allowed{"p", "variant", "t_join"};
    NonlinearitySpec spec;
    spec.p = number(j, "p");
    if (variant == "UnitH") {
        spec.variant = UnitH{};
    } else if (variant == "PowerExp") {
        allowed.insert({"m", "alpha", "q"});
        PowerExp pe;
        if (j.contains("m"))
            pe.m = number(j, "m");
        if (j.contains("alpha"))
            pe.alpha = number(j, "alpha");
        if (j.contains("q"))
            pe.q = number(j, "q");
        spec.variant = pe;
    } else if (variant == "H4") {
        allowed.insert("tau0");
        H4 h4;
        if (j.contains("tau0"))
            h4.tau0 = number(j, "tau0");
        spec.variant = h4;
    } else {
        fail(ErrorCode::Domain, fmt::format("unknown variant '{}' (UnitH, PowerExp, H4)", variant));
    }
    for (const auto& item : j.items())
        if (!allowed.contains(item.key()))
            fail(ErrorCode::Domain, fmt::format("unknown key '{}' for variant {}", item.key(), variant));
    if (j.contains("t_join"))
        spec.t_join = number(j, "t_join");
    return spec;
}

NonlinearitySpec load_spec(const std::string& arg)
{
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && arg[first] == '{')
        return parse_spec(arg);
    return parse_spec(read_text(arg));
}

std::string spec_to_json(const NonlinearitySpec& spec)
{
    nlohmann::json j;
    j["p"] = spec.p;
    if (std::holds_alternative<UnitH>(spec.variant)) {
        j["variant"] = "UnitH";
    } else if (const auto* pe = std::get_if<PowerExp>(&spec.variant)) {
        j["variant"] = "PowerExp";
        j["m"] = pe->m;
        j["alpha"] = pe->alpha;
        j["q"] = pe->q;
    } else {
        j["variant"] = "H4";
        j["tau0"] = std::get<H4>(spec.variant).tau0;
    }
    if (spec.t_join)
        j["t_join"] = *spec.t_join;
    return j.dump();
}

} // namespace blowup
