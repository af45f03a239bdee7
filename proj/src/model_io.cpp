#include "hallkit/model_io.hpp"

#include <fstream>

namespace hallkit {

using nlohmann::json;

namespace {

Vec2 vec2_of(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError(std::string(what) + " must be a pair of numbers");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

Coeff coeff_of(const json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ValidationError("displacement 'd' must be a pair of integers");
    return Coeff(j[0].get<int>(), j[1].get<int>());
}

int color_of(const LatticeSpec& spec, const json& j)
{
    if (!j.is_string()) throw ValidationError("color label must be a string");
    const int c = spec.color_index(j.get<std::string>());
    if (c < 0) throw ValidationError("unknown color '" + j.get<std::string>() + "'");
    return c;
}

double number_or(const json& j, const char* key, double fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

HoppingModel model_from_json(const json& doc)
{
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    for (const char* key : {"basis", "colors", "displacements"})
        if (!doc.contains(key)) throw ValidationError(std::string("model is missing '") + key + "'");

    HoppingModel m;
    const json& basis = doc["basis"];
    if (!basis.is_array() || basis.size() != 2) throw ValidationError("'basis' must hold two vectors");
    m.spec.ell1 = vec2_of(basis[0], "basis vector");
    m.spec.ell2 = vec2_of(basis[1], "basis vector");
    m.spec.L = 1;
    if (doc.contains("L")) {
        if (!doc["L"].is_number_integer()) throw ValidationError("'L' must be an integer");
        m.spec.L = doc["L"].get<int>();
    }
    if (!doc["colors"].is_array()) throw ValidationError("'colors' must be an array");
    for (const auto& c : doc["colors"]) {
        if (!c.is_string()) throw ValidationError("color labels must be strings");
        m.spec.colors.push_back(c.get<std::string>());
    }
    const json& disp = doc["displacements"];
    if (!disp.is_object()) throw ValidationError("'displacements' must map colors to vectors");
    for (const auto& c : m.spec.colors) {
        if (!disp.contains(c)) throw ValidationError("color '" + c + "' has no displacement");
        m.spec.displacements.push_back(vec2_of(disp[c], "displacement"));
    }
    if (disp.size() != m.spec.colors.size()) throw ValidationError("displacement given for an unknown color");
    validate(m.spec);

    m.mu = number_or(doc, "mu", 0.0);
    m.U = number_or(doc, "U", 0.0);
    if (doc.contains("onsite")) {
        const json& on = doc["onsite"];
        if (!on.is_object()) throw ValidationError("'onsite' must map colors to energies");
        m.onsite.assign(m.spec.colors.size(), 0.0);
        for (auto it = on.begin(); it != on.end(); ++it) {
            const int c = m.spec.color_index(it.key());
            if (c < 0) throw ValidationError("unknown color '" + it.key() + "' in onsite");
            if (!it.value().is_number()) throw ValidationError("onsite energies must be numbers");
            m.onsite[c] = it.value().get<double>();
        }
    }
    if (doc.contains("hoppings")) {
        if (!doc["hoppings"].is_array()) throw ValidationError("'hoppings' must be an array");
        for (const auto& h : doc["hoppings"]) {
            if (!h.is_object() || !h.contains("d") || !h.contains("from") || !h.contains("to"))
                throw ValidationError("hopping entries need d, from, to");
            m.hoppings.push_back({coeff_of(h["d"]), color_of(m.spec, h["from"]), color_of(m.spec, h["to"]),
                                  Complex(number_or(h, "re", 0.0), number_or(h, "im", 0.0))});
        }
    }
    if (doc.contains("interactions")) {
        if (!doc["interactions"].is_array()) throw ValidationError("'interactions' must be an array");
        for (const auto& v : doc["interactions"]) {
            if (!v.is_object() || !v.contains("d") || !v.contains("from") || !v.contains("to") || !v.contains("v"))
                throw ValidationError("interaction entries need d, from, to, v");
            m.interactions.push_back({coeff_of(v["d"]), color_of(m.spec, v["from"]), color_of(m.spec, v["to"]),
                                      number_or(v, "v", 0.0)});
        }
    }
    bool strict = false;
    if (doc.contains("strict")) {
        if (!doc["strict"].is_boolean()) throw ValidationError("'strict' must be a boolean");
        strict = doc["strict"].get<bool>();
    }
    validate_model(m, strict);
    return m;
}

HoppingModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("model file " + path + " is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

json model_to_json(const HoppingModel& model)
{
    json doc;
    doc["basis"] = {{model.spec.ell1.x(), model.spec.ell1.y()}, {model.spec.ell2.x(), model.spec.ell2.y()}};
    doc["L"] = model.spec.L;
    doc["colors"] = model.spec.colors;
    doc["displacements"] = json::object();
    for (int c = 0; c < model.spec.num_colors(); ++c)
        doc["displacements"][model.spec.colors[c]] = {model.spec.displacements[c].x(), model.spec.displacements[c].y()};
    doc["mu"] = model.mu;
    doc["U"] = model.U;
    if (!model.onsite.empty()) {
        doc["onsite"] = json::object();
        for (int c = 0; c < model.spec.num_colors(); ++c) doc["onsite"][model.spec.colors[c]] = model.onsite[c];
    }
    doc["hoppings"] = json::array();
    for (const auto& h : model.hoppings)
        doc["hoppings"].push_back({{"d", {h.d.x(), h.d.y()}},
                                   {"from", model.spec.colors[h.from]},
                                   {"to", model.spec.colors[h.to]},
                                   {"re", h.amplitude.real()},
                                   {"im", h.amplitude.imag()}});
    doc["interactions"] = json::array();
    for (const auto& v : model.interactions)
        doc["interactions"].push_back({{"d", {v.d.x(), v.d.y()}},
                                       {"from", model.spec.colors[v.from]},
                                       {"to", model.spec.colors[v.to]},
                                       {"v", v.strength}});
    doc["strict"] = true;
    return doc;
}

}  // namespace hallkit
