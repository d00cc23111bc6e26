#ifndef SWITCHLAG_ARTIFACTS_HPP
#define SWITCHLAG_ARTIFACTS_HPP

/**
 * @file artifacts.hpp
 * @brief On-disk artifacts: the value-field container (binary tensors,
 *        little-endian float64 payload) with its JSON sidecar, report and
 *        validation JSON, and CSV exports. All writers are deterministic:
 *        no timestamps, fixed key order, fixed float formatting.
 */

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "switchlag/field.hpp"
#include "switchlag/policy.hpp"
#include "switchlag/problem.hpp"
#include "switchlag/rewards.hpp"
#include "switchlag/solver.hpp"
#include "switchlag/version.hpp"

namespace switchlag {

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void ensure_little_endian() {
    const uint32_t probe = 1;
    uint8_t first;
    std::memcpy(&first, &probe, 1);
    if (first != 1) throw ArtifactError("field container requires a little-endian host");
}

// ---------------------------------------------------------------------------
// Field container.

namespace artifact_detail {

constexpr char kMagic[8] = {'S', 'W', 'L', 'F', '1', '\n', 0, 0};

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ArtifactError("field container truncated");
    return v;
}

inline void put_doubles(std::ostream& os, const std::vector<double>& v) {
    put<uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

inline std::vector<double> get_doubles(std::istream& is) {
    auto count = get<uint64_t>(is);
    std::vector<double> v(count);
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(double)));
    if (!is) throw ArtifactError("field container truncated");
    return v;
}

}  // namespace artifact_detail

inline void save_field(const ValueField& field, const std::string& path) {
    ensure_little_endian();
    namespace ad = artifact_detail;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArtifactError("cannot write field file: " + path);
    os.write(ad::kMagic, sizeof(ad::kMagic));
    const GridSpec& g = field.grid();
    ad::put<uint32_t>(os, uint32_t(g.n_t));
    ad::put<uint32_t>(os, uint32_t(field.end_index()));
    ad::put<uint32_t>(os, uint32_t(g.nu_steps));
    ad::put<uint32_t>(os, uint32_t(g.z_steps));
    ad::put<uint32_t>(os, uint32_t(g.n_x()));
    ad::put<double>(os, g.horizon);
    ad::put<uint32_t>(os, uint32_t(field.picard_index()));
    ad::put<uint32_t>(os, field.converged() ? 1u : 0u);
    ad::put_doubles(os, field.deltas());
    ad::put<double>(os, field.shift().min_upsilon);
    ad::put_doubles(os, field.shift().min_psi.ts);
    ad::put_doubles(os, field.shift().min_psi.vs);
    ad::put<double>(os, field.shift().constant);
    ad::put_doubles(os, field.offsets());
    ad::put<uint32_t>(os, uint32_t(field.n_pairs()));
    for (int p = 0; p < field.n_pairs(); ++p) ad::put_doubles(os, field.pair_data(p));
    if (!os) throw ArtifactError("write failure on field file: " + path);
}

inline ValueField load_field(const std::string& path, const ModeTables& tables,
                             const GridSpec& grid) {
    ensure_little_endian();
    namespace ad = artifact_detail;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot open field file: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, ad::kMagic, sizeof(magic)) != 0)
        throw ArtifactError("not a field container: " + path);
    auto n_t = ad::get<uint32_t>(is);
    auto end_index = ad::get<uint32_t>(is);
    auto nu_steps = ad::get<uint32_t>(is);
    auto z_steps = ad::get<uint32_t>(is);
    auto n_x = ad::get<uint32_t>(is);
    auto horizon = ad::get<double>(is);
    if (int(n_t) != grid.n_t || int(nu_steps) != grid.nu_steps || int(z_steps) != grid.z_steps ||
        int(n_x) != grid.n_x() || std::abs(horizon - grid.horizon) > 1e-12)
        throw ArtifactError("field grid does not match the spec grid");
    ValueField field(tables, grid, int(end_index));
    field.set_picard_index(int(ad::get<uint32_t>(is)));
    field.set_converged(ad::get<uint32_t>(is) != 0);
    field.deltas() = ad::get_doubles(is);
    NormalizationShift shift;
    shift.min_upsilon = ad::get<double>(is);
    shift.min_psi.ts = ad::get_doubles(is);
    shift.min_psi.vs = ad::get_doubles(is);
    shift.constant = ad::get<double>(is);
    field.set_shift(std::move(shift));
    field.set_offsets(ad::get_doubles(is));
    auto n_pairs = ad::get<uint32_t>(is);
    if (int(n_pairs) != field.n_pairs()) throw ArtifactError("field pair count mismatch");
    for (int p = 0; p < field.n_pairs(); ++p) {
        auto data = ad::get_doubles(is);
        if (data.size() != field.pair_data(p).size())
            throw ArtifactError("field tensor size mismatch for pair " + std::to_string(p));
        field.pair_data(p) = std::move(data);
    }
    return field;
}

// ---------------------------------------------------------------------------
// JSON documents.

inline nlohmann::json grid_json(const GridSpec& g) {
    nlohmann::json j{{"horizon", g.horizon},
                     {"n_t", g.n_t},
                     {"nu_steps", g.nu_steps},
                     {"z_steps", g.z_steps}};
    if (g.factor) {
        j["factor"] = {{"nodes", int(g.factor->nodes.size())},
                       {"x_min", g.factor->nodes.front()},
                       {"x_max", g.factor->nodes.back()},
                       {"x0_node", g.factor->x0_node}};
    }
    return j;
}

inline nlohmann::json validation_json(const ValidationReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json je{{"id", e.id}, {"pass", e.pass}, {"certified", e.certified}};
        if (!e.note.empty()) je["note"] = e.note;
        if (!e.witness.empty()) je["witness"] = e.witness;
        for (const auto& [k, v] : e.values) je["values"][k] = v;
        entries.push_back(std::move(je));
    }
    return nlohmann::json{{"pass", report.all_pass},
                          {"grid", report.grid_description},
                          {"assumptions", std::move(entries)}};
}

inline nlohmann::json sidecar_json(const ValueField& field, const SolveDiagnostics& diag,
                                   const std::string& spec_sha, const std::string& name) {
    return nlohmann::json{
        {"format", "switchlag-field"},
        {"layout", "per-pair row-major (t, x, nu..., z...) float64 little-endian"},
        {"toolkit_version", kVersion},
        {"name", name},
        {"spec_sha256", spec_sha},
        {"grid", grid_json(field.grid())},
        {"end_index", field.end_index()},
        {"picard_k", diag.k},
        {"converged", diag.converged},
        {"monotone_deltas", diag.monotone_deltas},
        {"sup_v0", diag.sup_v0},
        {"tol_used", diag.tol_used},
        {"k_max_used", diag.k_max_used},
        {"deltas", diag.deltas},
        {"normalization",
         {{"min_upsilon", field.shift().min_upsilon},
          {"constant", field.shift().constant},
          {"identity", field.shift().is_identity()}}}};
}

inline nlohmann::json report_json(const EvaluationReport& rep, const std::string& spec_sha,
                                  const std::string& name) {
    return nlohmann::json{{"format", "switchlag-evaluation"},
                          {"toolkit_version", kVersion},
                          {"name", name},
                          {"spec_sha256", spec_sha},
                          {"value_at_root", rep.value_at_root},
                          {"mc_estimate", rep.mc_estimate},
                          {"mc_stderr", rep.mc_stderr},
                          {"gap", rep.gap},
                          {"n_paths", rep.n_paths},
                          {"seed", rep.base_seed},
                          {"delta_switch", rep.delta_switch},
                          {"intervention_cap", rep.intervention_cap},
                          {"max_interventions", rep.max_interventions},
                          {"cap_exceeded", rep.cap_exceeded}};
}

/// Switching-region summary: per time slice and pair, the grid nodes where
/// the rule fires and the switch mode it selects.
inline nlohmann::json policy_regions_json(const ProblemSpec& spec, const GridSpec& grid,
                                          const Policy& policy) {
    const ValueField& field = policy.field();
    const ModeTables& tables = spec.tables;
    nlohmann::json slices = nlohmann::json::array();
    const int n = tables.n();
    for (int i = 0; i < field.end_index(); ++i) {
        for (int p = 0; p < field.n_pairs(); ++p) {
            const auto& pair = tables.pairs()[p];
            const auto& l = field.layout(p);
            nlohmann::json fire = nlohmann::json::array();
            HybridState s;
            s.t = i * grid.dt();
            s.a = pair.a;
            s.b = pair.b;
            s.nu.assign(n, 0.0);
            s.z.assign(n, 0.0);
            for (int x = 0; x < grid.n_x(); ++x) {
                s.x_node = grid.factor ? x : -1;
                for (size_t nf = 0; nf < l.nu_count; ++nf) {
                    size_t rem = nf;
                    for (size_t jx = l.nu_axes.size(); jx-- > 0;) {
                        s.nu[l.nu_axes[jx]] = grid.nu_value(int(rem % size_t(grid.nu_steps + 1)));
                        rem /= size_t(grid.nu_steps + 1);
                    }
                    for (size_t zf = 0; zf < l.z_count; ++zf) {
                        rem = zf;
                        for (size_t jx = l.z_axes.size(); jx-- > 0;) {
                            s.z[l.z_axes[jx]] = grid.z_value(int(rem % size_t(grid.z_steps + 1)));
                            rem /= size_t(grid.z_steps + 1);
                        }
                        PolicyDecision d = policy.decide(s);
                        if (d.intervene)
                            fire.push_back({x, nf, zf, tables.switch_index(d.target)});
                    }
                }
            }
            if (!fire.empty())
                slices.push_back({{"t_index", i}, {"pair", p}, {"fire", std::move(fire)}});
        }
    }
    return nlohmann::json{{"format", "switchlag-policy-regions"},
                          {"delta_switch", policy.delta_switch()},
                          {"node_order", "[x, nu_flat, z_flat, target_switch_code]"},
                          {"slices", std::move(slices)}};
}

// ---------------------------------------------------------------------------
// CSV exports.

inline std::string convergence_csv(const SolveDiagnostics& diag) {
    std::string out = "k,sup_delta\n";
    for (size_t i = 0; i < diag.deltas.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, diag.deltas[i]);
        out += buf;
    }
    return out;
}

inline std::string path_csv(const HybridPath& path, const GridSpec& grid) {
    auto vec_str = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s%.12g", i ? "|" : "", v[i]);
            s += buf;
        }
        return s;
    };
    auto mode_str = [](const PlantVec& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) s += (i ? "|" : "") + std::to_string(int(v[i]));
        return s;
    };
    std::string out = "time,event,a,b,nu,z,x\n";
    auto emit = [&](double t, const char* kind, const OpMode& a, const SwitchMode& b,
                    const std::vector<double>& nu, const std::vector<double>& z, int x_node) {
        char head[48];
        std::snprintf(head, sizeof(head), "%.12g,", t);
        out += head;
        out += kind;
        out += "," + mode_str(a.comps) + "," + mode_str(b.bits) + "," + vec_str(nu) + "," +
               vec_str(z) + ",";
        if (x_node >= 0 && grid.factor) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.12g", grid.factor->nodes[x_node]);
            out += buf;
        }
        out += "\n";
    };
    emit(path.start.t, "start", path.start.a, path.start.b, path.start.nu, path.start.z,
         path.start.x_node);
    for (const auto& ev : path.events)
        emit(ev.time, ev.kind == EventKind::ChainJump ? "chain_jump" : "switch", ev.a, ev.b, ev.nu,
             ev.z, -1);
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArtifactError("cannot write file: " + path);
    os << content;
    if (!os) throw ArtifactError("write failure: " + path);
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace switchlag

#endif  // SWITCHLAG_ARTIFACTS_HPP
