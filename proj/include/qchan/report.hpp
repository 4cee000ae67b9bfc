#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qchan/algebra.hpp"
#include "qchan/channel.hpp"
#include "qchan/criteria.hpp"
#include "qchan/dynamics.hpp"
#include "qchan/fixture.hpp"

namespace qchan {

inline constexpr const char* tool_name = "qchan";
inline constexpr const char* tool_version = "1.0.0";

using Json = nlohmann::ordered_json;

struct RunOptions {
    double rank_tol = linalg::default_rank_tol;
    double peripheral_eps = 1e-6;
    std::uint64_t seed = 0;
    bool include_identity = true;
    std::optional<int> m_max;
    double channel_tol = 1e-10;
    double cycle_tol = 1e-6;
    std::size_t steps = 200;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"validate", "spectrum",  "algebra",  "shemesh",
                                            "primitivity", "predict", "simulate", "report"};
    return c;
}

namespace json_io {

inline Json complex(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json complex_list(const std::vector<Complex>& zs)
{
    Json a = Json::array();
    for (const auto& z : zs)
        a.push_back(complex(z));
    return a;
}

inline Json matrix(const ComplexMatrix& m)
{
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c)
            row.push_back(complex(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json vector(const ComplexVector& v)
{
    Json a = Json::array();
    for (Index k = 0; k < v.size(); ++k)
        a.push_back(complex(v(k)));
    return a;
}

inline Json subspace(const SubspaceBasis& s)
{
    Json b = Json::array();
    for (Index k = 0; k < s.dim(); ++k)
        b.push_back(vector(s.vectors.col(k)));
    return Json{{"dim", s.dim()}, {"basis", std::move(b)}};
}

inline Json error(const Error& e)
{
    return Json{{"kind", e.kind()}, {"message", e.what()}, {"exit_code", e.exit_code()}};
}

} // namespace json_io

inline Json tolerances_json(const RunOptions& o)
{
    return Json{{"rank_tol", o.rank_tol},
                {"peripheral_eps", o.peripheral_eps},
                {"channel_tol", o.channel_tol},
                {"cluster_radius", detail::cluster_radius},
                {"eigenspace_tol", detail::eigenspace_tol},
                {"star_closure_tol", star_closure_tol},
                {"block_leakage_tol", block_leakage_tol},
                {"discriminant_cutoff", discriminant_cutoff},
                {"invertibility_cutoff", invertibility_cutoff},
                {"cycle_tol", o.cycle_tol},
                {"projector_check_tol", projector_check_tol},
                {"seed", o.seed}};
}

namespace sections {

inline Json validation(const KrausChannel& ch, const RunOptions& o)
{
    const auto f = validate(ch, o.channel_tol);
    return Json{{"trace_preserving", f.trace_preserving},
                {"unital", f.unital},
                {"tp_residual", f.tp_residual},
                {"unital_residual", f.unital_residual}};
}

inline Json spectrum(const KrausChannel& ch, const RunOptions& o)
{
    const auto s = qchan::spectrum(ch, o.peripheral_eps);
    const auto clusters = linalg::cluster_eigenvalues(s.peripheral, detail::cluster_radius);
    Json distinct = Json::array();
    for (const auto& c : clusters)
        distinct.push_back(Json{{"value", json_io::complex(c.value)}, {"multiplicity", c.multiplicity}});
    double radius = 0.0;
    for (const auto& l : s.eigenvalues)
        radius = std::max(radius, std::abs(l));
    Json mats = Json::array();
    for (std::size_t k = 0; k < s.peripheral_eigenmatrices.size(); ++k)
        mats.push_back(Json{{"eigenvalue", json_io::complex(s.eigenmatrix_values[k])},
                            {"matrix", json_io::matrix(s.peripheral_eigenmatrices[k])}});
    return Json{{"eigenvalues", json_io::complex_list(s.eigenvalues)},
                {"spectral_radius", radius},
                {"peripheral", json_io::complex_list(s.peripheral)},
                {"peripheral_set", std::move(distinct)},
                {"peripheral_eigenmatrices", std::move(mats)}};
}

inline Json algebra(const KrausChannel& ch, const RunOptions& o)
{
    const Index n = ch.dim();
    const auto wb = generate_basis(ch.kraus(), o.include_identity, o.rank_tol);
    const auto cl = is_star_closed(wb, star_closure_tol);
    Json coords = Json::array();
    for (std::size_t i = 0; i < cl.adjoint_coordinates.size(); ++i)
        coords.push_back(Json{{"generator", i + 1},
                              {"coordinates", json_io::vector(cl.adjoint_coordinates[i])},
                              {"residual", cl.adjoint_residuals[i]}});
    const bool full = o.include_identity ? wb.dimension() == n * n : is_irreducible(ch.kraus(), o.rank_tol);
    return Json{{"include_identity", o.include_identity},
                {"dimension", wb.dimension()},
                {"full_dimension", n * n},
                {"irreducible", full},
                {"labels", wb.labels},
                {"level_dims", wb.level_dims},
                {"star_closed", cl.closed},
                {"star_closure_residual", cl.max_residual},
                {"generator_adjoints", std::move(coords)}};
}

inline Json blocks(const KrausChannel& ch, const RunOptions& o)
{
    const auto bs = block_decompose(ch.kraus(), o.rank_tol, o.seed);
    return Json{{"dims", bs.block_dims}, {"irreducible", bs.block_irreducible}, {"leakage", bs.leakage}};
}

inline Json shemesh(const KrausChannel& ch, const RunOptions& o)
{
    const auto& k = ch.kraus();
    Json pairs = Json::array();
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = i + 1; j < k.size(); ++j) {
            Json p = json_io::subspace(qchan::shemesh(k[i], k[j], o.rank_tol));
            p["pair"] = Json::array({i + 1, j + 1});
            pairs.push_back(std::move(p));
        }
    Json disc = Json::array();
    Json gen = nullptr;
    for (std::size_t h = 0; h < k.size(); ++h) {
        const Complex d = scaled_discriminant(k[h]);
        disc.push_back(Json{{"generator", h + 1},
                            {"char_discriminant", json_io::complex(linalg::char_discriminant(k[h]))},
                            {"scaled_discriminant", json_io::complex(d)}});
        if (gen.is_null() && k.size() >= 2 && std::abs(d) > discriminant_cutoff) {
            std::vector<ComplexMatrix> others;
            for (std::size_t j = 0; j < k.size(); ++j)
                if (j != h)
                    others.push_back(k[j]);
            gen = json_io::subspace(generalized_shemesh(k[h], others, o.rank_tol));
            gen["h"] = h + 1;
        }
    }
    return Json{{"pairs", std::move(pairs)}, {"discriminants", std::move(disc)}, {"generalized", std::move(gen)}};
}

inline Json primitivity(const KrausChannel& ch, const RunOptions& o)
{
    const auto p = qchan::primitivity(ch, o.m_max, o.rank_tol);
    return Json{{"certified", p.certified},
                {"witness_m", p.witness_m ? Json(*p.witness_m) : Json(nullptr)},
                {"span_dims", p.span_dims},
                {"m_max", p.m_max}};
}

inline Json prediction(const KrausChannel& ch, const RunOptions& o)
{
    PredictOptions po;
    po.seed = o.seed;
    po.rank_tol = o.rank_tol;
    po.channel_tol = o.channel_tol;
    po.primitivity_m_max = o.m_max;
    const auto p = predict_peripheral(ch, po);
    Json certs = Json::array();
    for (const auto& c : p.certificates)
        certs.push_back(Json{{"name", c.name}, {"block", c.block ? Json(*c.block) : Json(nullptr)}, {"detail", c.detail}});
    return Json{{"structure", to_string(p.structure)},
                {"block_dims", p.block_dims},
                {"order_bounds", p.order_bounds},
                {"period_bound", p.period_bound ? Json(*p.period_bound) : Json("unbounded")},
                {"global_divisor_bound", p.global_divisor_bound ? Json(*p.global_divisor_bound) : Json(nullptr)},
                {"primitive", p.primitive},
                {"certificates", std::move(certs)}};
}

inline Json dynamics(const KrausChannel& ch, const RunOptions& o)
{
    const Index n = ch.dim();
    const auto cyc = detect_cycle(ch, o.cycle_tol, o.peripheral_eps);
    Json angles = Json::array();
    for (const auto& a : cyc.angles)
        angles.push_back(a ? Json::array({a->p, a->q}) : Json(nullptr));

    // Deterministic start: a full-rank, non-diagonal state.
    ComplexMatrix rho0(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            rho0(r, c) = r == c ? Complex(static_cast<double>(r + 1), 0.0)
                                : Complex(0.1, r < c ? 0.05 : -0.05);
    rho0 /= rho0.trace();
    const auto t = iterate(ch, rho0, o.steps);
    const ComplexMatrix& last = t.states.back();
    Json tail = Json::array();
    for (std::size_t lag = 1; lag <= 4 && lag <= o.steps; ++lag)
        tail.push_back((last - t.states[o.steps - lag]).norm());

    return Json{{"detected_period", cyc.period ? Json(*cyc.period) : Json("none certified")},
                {"peripheral_angles", std::move(angles)},
                {"non_cyclic", json_io::complex_list(cyc.non_cyclic)},
                {"steps", o.steps},
                {"initial_state", json_io::matrix(rho0)},
                {"final_state", json_io::matrix(last)},
                {"final_trace", json_io::complex(last.trace())},
                {"lag_distances", std::move(tail)},
                {"warnings", t.warnings}};
}

} // namespace sections

struct RunResult {
    Json report;
    int exit_code = 0;
};

/// Runs one command on one fixture. Errors from single-section commands
/// propagate; `report` records per-section errors in place and returns the
/// highest exit code among them.
inline RunResult run_command(const std::string& command, const ChannelFixture& fx, const RunOptions& o)
{
    using Section = std::function<Json(const KrausChannel&, const RunOptions&)>;
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Section>>>> table{
        {"validate", {{"validation", sections::validation}}},
        {"spectrum", {{"spectrum", sections::spectrum}}},
        {"algebra", {{"algebra", sections::algebra}, {"blocks", sections::blocks}}},
        {"shemesh", {{"shemesh", sections::shemesh}}},
        {"primitivity", {{"primitivity", sections::primitivity}}},
        {"predict", {{"prediction", sections::prediction}}},
        {"simulate", {{"dynamics", sections::dynamics}}},
        {"report",
         {{"validation", sections::validation},
          {"spectrum", sections::spectrum},
          {"algebra", sections::algebra},
          {"blocks", sections::blocks},
          {"shemesh", sections::shemesh},
          {"primitivity", sections::primitivity},
          {"prediction", sections::prediction},
          {"dynamics", sections::dynamics}}},
    };
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == command; });
    if (it == table.end())
        throw PreconditionError("unknown command '" + command + "'");

    RunResult out;
    Json& doc = out.report;
    doc["tool"] = Json{{"name", tool_name}, {"version", tool_version}};
    doc["command"] = command;
    doc["fixture"] = fx.name;
    doc["dim"] = fx.dim;
    doc["kraus_count"] = fx.kraus.size();
    if (!fx.metadata.empty())
        doc["metadata"] = fx.metadata;

    const KrausChannel ch = fx.channel();
    for (const auto& [key, fn] : it->second) {
        const bool blocks_optional = key == "blocks";
        if (command != "report" && !blocks_optional) {
            doc[key] = fn(ch, o);
            continue;
        }
        try {
            doc[key] = fn(ch, o);
        } catch (const StructureError& e) {
            // No block decomposition without *-closure; informational only.
            doc[key] = Json{{"error", json_io::error(e)}};
        } catch (const Error& e) {
            if (command != "report")
                throw;
            doc[key] = Json{{"error", json_io::error(e)}};
            out.exit_code = std::max(out.exit_code, e.exit_code());
        }
    }
    doc["tolerances"] = tolerances_json(o);
    return out;
}

inline Json error_report(const std::string& source, const Error& e)
{
    return Json{{"tool", Json{{"name", tool_name}, {"version", tool_version}}},
                {"source", source},
                {"error", json_io::error(e)}};
}

/// Short human-readable digest of a report.
inline std::string summarize(const Json& doc)
{
    std::ostringstream s;
    if (doc.contains("error")) {
        s << doc.value("source", std::string("?")) << ": " << doc["error"]["kind"].get<std::string>() << ": "
          << doc["error"]["message"].get<std::string>() << "\n";
        return s.str();
    }
    s << doc["fixture"].get<std::string>() << " (n = " << doc["dim"] << ", K = " << doc["kraus_count"] << ")\n";
    auto ok = [&](const char* key) { return doc.contains(key) && !doc[key].contains("error"); };
    if (ok("validation"))
        s << "  TP " << doc["validation"]["trace_preserving"] << ", unital " << doc["validation"]["unital"] << "\n";
    if (ok("spectrum")) {
        s << "  peripheral:";
        for (const auto& c : doc["spectrum"]["peripheral_set"])
            s << " " << c["value"][0].get<double>() << (c["value"][1].get<double>() < 0 ? "-" : "+")
              << std::abs(c["value"][1].get<double>()) << "i (x" << c["multiplicity"] << ")";
        s << "\n";
    }
    if (ok("algebra"))
        s << "  algebra dim " << doc["algebra"]["dimension"] << ", star closed " << doc["algebra"]["star_closed"]
          << "\n";
    if (ok("blocks"))
        s << "  blocks " << doc["blocks"]["dims"].dump() << "\n";
    if (ok("prediction"))
        s << "  prediction " << doc["prediction"]["structure"].get<std::string>() << ", period bound "
          << doc["prediction"]["period_bound"].dump() << "\n";
    if (ok("dynamics"))
        s << "  detected period " << doc["dynamics"]["detected_period"].dump() << "\n";
    for (const auto& [key, val] : doc.items())
        if (val.is_object() && val.contains("error") && key != "blocks")
            s << "  " << key << ": " << val["error"]["kind"].get<std::string>() << "\n";
    return s.str();
}

} // namespace qchan
