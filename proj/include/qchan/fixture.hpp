#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qchan/channel.hpp"

namespace qchan {

/// A named channel as stored on disk:
///
///   { "name": "...", "dim": n,
///     "kraus": [ [[ [re, im], ... ], ...], ... ],   // K matrices, row-major rows
///     "metadata": { ... } }                          // optional, free form
struct ChannelFixture {
    std::string name;
    Index dim = 0;
    std::vector<ComplexMatrix> kraus;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

    KrausChannel channel() const { return KrausChannel(kraus); }
};

namespace detail {

inline Complex parse_entry(const nlohmann::ordered_json& e, const std::string& where)
{
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ParseError(where + ": expected an [re, im] pair of numbers, got " + e.dump());
    return {e[0].get<double>(), e[1].get<double>()};
}

} // namespace detail

inline ChannelFixture fixture_from_json(const nlohmann::ordered_json& doc, const std::string& source)
{
    if (!doc.is_object())
        throw ParseError(source + ": top level must be an object");
    ChannelFixture fx;
    if (!doc.contains("name") || !doc["name"].is_string())
        throw ParseError(source + ": missing string field 'name'");
    fx.name = doc["name"].get<std::string>();
    if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1)
        throw ParseError(source + ": missing positive integer field 'dim'");
    fx.dim = doc["dim"].get<Index>();
    if (!doc.contains("kraus") || !doc["kraus"].is_array() || doc["kraus"].empty())
        throw ParseError(source + ": missing non-empty array field 'kraus'");
    if (doc.contains("metadata")) {
        if (!doc["metadata"].is_object())
            throw ParseError(source + ": 'metadata' must be an object");
        fx.metadata = doc["metadata"];
    }

    const auto& ks = doc["kraus"];
    for (std::size_t k = 0; k < ks.size(); ++k) {
        const std::string where = source + ": kraus[" + std::to_string(k) + "]";
        const auto& m = ks[k];
        if (!m.is_array())
            throw ParseError(where + ": expected an array of rows");
        if (static_cast<Index>(m.size()) != fx.dim)
            throw ShapeError(where + ": has " + std::to_string(m.size()) + " rows, but dim is " +
                             std::to_string(fx.dim));
        ComplexMatrix a(fx.dim, fx.dim);
        for (std::size_t r = 0; r < m.size(); ++r) {
            const auto& row = m[r];
            if (!row.is_array() || static_cast<Index>(row.size()) != fx.dim)
                throw ParseError(where + " row " + std::to_string(r) + ": expected " + std::to_string(fx.dim) +
                                 " entries, got " + (row.is_array() ? std::to_string(row.size()) : row.dump()));
            for (std::size_t c = 0; c < row.size(); ++c)
                a(static_cast<Index>(r), static_cast<Index>(c)) = detail::parse_entry(
                    row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
        fx.kraus.push_back(std::move(a));
    }
    (void)fx.channel(); // structural validation: K <= n^2
    return fx;
}

inline ChannelFixture parse_fixture(std::string_view text, const std::string& source = "<fixture>")
{
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
    return fixture_from_json(doc, source);
}

inline ChannelFixture load_fixture(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fixture(ss.str(), path.string());
}

inline nlohmann::ordered_json to_json(const ChannelFixture& fx)
{
    nlohmann::ordered_json doc;
    doc["name"] = fx.name;
    doc["dim"] = fx.dim;
    auto& ks = doc["kraus"] = nlohmann::ordered_json::array();
    for (const auto& a : fx.kraus) {
        nlohmann::ordered_json m = nlohmann::ordered_json::array();
        for (Index r = 0; r < a.rows(); ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (Index c = 0; c < a.cols(); ++c)
                row.push_back({a(r, c).real(), a(r, c).imag()});
            m.push_back(std::move(row));
        }
        ks.push_back(std::move(m));
    }
    doc["metadata"] = fx.metadata;
    return doc;
}

} // namespace qchan
