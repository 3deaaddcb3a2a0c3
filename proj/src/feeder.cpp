#include "vpo/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vpo {

namespace {

using json = nlohmann::json;

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw FeederError(std::string("malformed document: missing numeric '") + key + "'");
    return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw FeederError(std::string("malformed document: '") + key + "' is not numeric");
    return j[key].get<double>();
}

std::int64_t require_int(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw FeederError(std::string("malformed document: missing integer '") + key + "'");
    return j[key].get<std::int64_t>();
}

}  // namespace

int Feeder::index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < external_id.size(); ++i)
        if (external_id[i] == id) return static_cast<int>(i);
    throw FeederError("unknown node id " + std::to_string(id));
}

const OltcSite* Feeder::oltc_on_branch(int b) const {
    for (const auto& o : oltcs)
        if (o.branch == b) return &o;
    return nullptr;
}

const CapSite* Feeder::cap_at_node(int node) const {
    for (const auto& c : caps)
        if (c.node == node) return &c;
    return nullptr;
}

const DerSite* Feeder::der_at_node(int node) const {
    for (const auto& d : ders)
        if (d.node == node) return &d;
    return nullptr;
}

Feeder Feeder::with_cap_count(int count) const {
    Feeder f = *this;
    if (count >= 0 && count < static_cast<int>(f.caps.size()))
        f.caps.resize(static_cast<std::size_t>(count));
    return f;
}

Feeder Feeder::with_uniform_alpha(double a) const {
    Feeder f = *this;
    std::fill(f.alpha.begin(), f.alpha.end(), a);
    return f;
}

Feeder parse_feeder(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw FeederError(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw FeederError("malformed document: top level is not an object");

    Feeder f;
    f.name = doc.value("name", std::string("feeder"));
    f.base_mva = require_number(doc, "base_mva");
    f.base_kv = require_number(doc, "base_kv");
    f.v0 = require_number(doc, "v0_pu");
    if (f.base_mva <= 0 || f.base_kv <= 0 || f.v0 <= 0)
        throw FeederError("malformed document: bases and v0_pu must be positive");

    if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty())
        throw FeederError("malformed document: 'nodes' array required");
    if (!doc.contains("branches") || !doc["branches"].is_array())
        throw FeederError("malformed document: 'branches' array required");

    struct NodeRec {
        double v_min, v_max, v_lo, v_hi, alpha;
        bool tight_defaulted;
    };
    std::map<std::int64_t, NodeRec> nodes;
    for (const auto& jn : doc["nodes"]) {
        const std::int64_t id = require_int(jn, "id");
        NodeRec rec{};
        rec.v_min = number_or(jn, "v_min", 0.81);
        rec.v_max = number_or(jn, "v_max", 1.21);
        rec.tight_defaulted = !(jn.contains("v_lo") && jn.contains("v_hi"));
        rec.v_lo = number_or(jn, "v_lo", 0.98 * 0.98);
        rec.v_hi = number_or(jn, "v_hi", 1.02 * 1.02);
        rec.alpha = number_or(jn, "alpha", 0.001);
        if (!nodes.emplace(id, rec).second)
            throw FeederError("malformed document: duplicate node id " + std::to_string(id));
    }

    struct BranchRec {
        std::int64_t id, from, to;
        double r, x;
    };
    std::vector<BranchRec> branches;
    std::set<std::int64_t> branch_ids;
    for (const auto& jb : doc["branches"]) {
        BranchRec b{};
        b.id = jb.contains("id") ? require_int(jb, "id")
                                 : static_cast<std::int64_t>(branches.size());
        b.from = require_int(jb, "from");
        b.to = require_int(jb, "to");
        b.r = require_number(jb, "r_pu");
        b.x = require_number(jb, "x_pu");
        if (!std::isfinite(b.r) || !std::isfinite(b.x) || b.r < 0)
            throw FeederError("malformed document: branch impedance invalid");
        if (!branch_ids.insert(b.id).second)
            throw FeederError("malformed document: duplicate branch id " + std::to_string(b.id));
        branches.push_back(b);
    }

    const std::size_t n = branches.size();
    if (branches.empty()) throw FeederError("malformed document: no branches");

    // The substation is the unique branch endpoint that is not listed in
    // 'nodes'. Tree structure is validated by the traversal below, so a
    // cyclic or disconnected document gets a specific error before any
    // count bookkeeping.
    std::set<std::int64_t> endpoints;
    for (const auto& b : branches) {
        endpoints.insert(b.from);
        endpoints.insert(b.to);
    }
    std::int64_t root_id = 0;
    int root_count = 0;
    for (std::int64_t id : endpoints) {
        if (!nodes.count(id)) {
            root_id = id;
            ++root_count;
        }
    }
    if (root_count != 1)
        throw FeederError("malformed document: expected exactly one substation endpoint absent from 'nodes', found " +
                          std::to_string(root_count));

    // Build adjacency and orient away from the substation by BFS. A revisited
    // node means a cycle; an unreached node means a disconnected component.
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, std::size_t>>> adj;
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        adj[branches[bi].from].push_back({branches[bi].to, bi});
        adj[branches[bi].to].push_back({branches[bi].from, bi});
    }

    std::map<std::int64_t, int> canon;           // document id -> canonical index
    std::vector<std::int64_t> order{root_id};    // canonical index -> document id
    canon[root_id] = 0;
    std::vector<int> parent{-1};
    std::vector<std::size_t> branch_doc_index;  // canonical branch -> doc branch

    std::vector<std::int64_t> frontier{root_id};
    std::set<std::size_t> used_branches;
    while (!frontier.empty()) {
        std::vector<std::int64_t> next;
        for (std::int64_t u : frontier) {
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (const auto& [v, bi] : it->second) {
                if (used_branches.count(bi)) continue;
                used_branches.insert(bi);
                if (canon.count(v)) throw FeederError("cycle detected in branch set");
                canon[v] = static_cast<int>(order.size());
                order.push_back(v);
                parent.push_back(canon[u]);
                branch_doc_index.push_back(bi);
                next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    if (used_branches.size() != n)
        throw FeederError("disconnected node: " + std::to_string(n - used_branches.size()) +
                          " branch(es) unreachable from the substation");
    if (order.size() != endpoints.size())
        throw FeederError("disconnected node: only " + std::to_string(order.size()) + " of " +
                          std::to_string(endpoints.size()) + " nodes reachable from the substation");
    if (nodes.size() != n)
        throw FeederError("malformed document: expected " + std::to_string(n) +
                          " non-substation nodes for " + std::to_string(n) + " branches");
    for (const auto& [id, rec] : nodes) {
        (void)rec;
        if (!canon.count(id))
            throw FeederError("disconnected node: listed node " + std::to_string(id) +
                              " touches no branch");
    }

    f.n = static_cast<int>(n);
    f.parent = parent;
    f.external_id = order;
    f.branch_r.resize(n);
    f.branch_x.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
        f.branch_r[b] = branches[branch_doc_index[b]].r;
        f.branch_x[b] = branches[branch_doc_index[b]].x;
    }

    bool any_pos = false, any_neg = false;
    for (double x : f.branch_x) {
        if (x > 0) any_pos = true;
        if (x < 0) any_neg = true;
    }
    if (any_pos && any_neg) throw FeederError("mixed-sign reactances are not supported");
    f.line_class = any_pos ? LineClass::Inductive : (any_neg ? LineClass::Capacitive : LineClass::Resistive);

    f.v_min.resize(n);
    f.v_max.resize(n);
    f.v_lo.resize(n);
    f.v_hi.resize(n);
    f.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeRec& rec = nodes.at(order[i + 1]);
        f.v_min[i] = rec.v_min;
        f.v_max[i] = rec.v_max;
        f.v_lo[i] = rec.v_lo;
        f.v_hi[i] = rec.v_hi;
        f.alpha[i] = rec.alpha;
        f.tight_bounds_defaulted = f.tight_bounds_defaulted || rec.tight_defaulted;
        if (!(f.v_min[i] <= f.v_lo[i] && f.v_lo[i] <= f.v_hi[i] && f.v_hi[i] <= f.v_max[i]))
            throw FeederError("limit inversion at node " + std::to_string(order[i + 1]) +
                              ": require v_min <= v_lo <= v_hi <= v_max");
        if (f.alpha[i] < 0) throw FeederError("negative alpha at node " + std::to_string(order[i + 1]));
    }

    if (doc.contains("ders")) {
        for (const auto& jd : doc["ders"]) {
            DerSite d;
            d.node = f.index_of(require_int(jd, "node"));
            if (d.node == 0) throw FeederError("DER may not sit at the substation");
            if (f.der_at_node(d.node) != nullptr)
                throw FeederError("duplicate DER at node " + std::to_string(f.id_of(d.node)));
            d.q_min = require_number(jd, "q_min_pu");
            d.q_max = require_number(jd, "q_max_pu");
            if (d.q_min > d.q_max) throw FeederError("DER q range inverted");
            f.ders.push_back(d);
        }
    }
    if (doc.contains("oltcs")) {
        for (const auto& jo : doc["oltcs"]) {
            OltcSite o;
            const std::int64_t want_id = require_int(jo, "branch");
            int canon_branch = -1;
            for (std::size_t b = 0; b < n; ++b)
                if (branches[branch_doc_index[b]].id == want_id) canon_branch = static_cast<int>(b);
            if (canon_branch < 0)
                throw FeederError("oltc refers to unknown branch " + std::to_string(want_id));
            o.branch = canon_branch;
            if (f.oltc_on_branch(canon_branch) != nullptr)
                throw FeederError("duplicate tap changer on branch " + std::to_string(want_id));
            o.tau = number_or(jo, "tau", 0.00625);
            o.n_min = static_cast<int>(jo.contains("n_min") ? require_int(jo, "n_min") : -16);
            o.n_max = static_cast<int>(jo.contains("n_max") ? require_int(jo, "n_max") : 16);
            if (o.n_min >= o.n_max) throw FeederError("oltc tap range inverted");
            if (1.0 + o.tau * o.n_min <= 0) throw FeederError("oltc tap table reaches a non-positive ratio");
            if (f.branch_r[o.branch] != 0.0 || f.branch_x[o.branch] != 0.0)
                throw FeederError("oltc branch must have zero impedance (ideal ratio model)");
            f.oltcs.push_back(o);
        }
    }
    if (doc.contains("caps")) {
        for (const auto& jc : doc["caps"]) {
            CapSite c;
            c.node = f.index_of(require_int(jc, "node"));
            if (c.node == 0) throw FeederError("capacitor bank may not sit at the substation");
            if (f.cap_at_node(c.node) != nullptr)
                throw FeederError("duplicate capacitor bank at node " + std::to_string(f.id_of(c.node)));
            c.y_unit = require_number(jc, "y_c_pu");
            if (c.y_unit <= 0) throw FeederError("capacitor unit admittance must be positive");
            c.n_min = static_cast<int>(jc.contains("n_min") ? require_int(jc, "n_min") : 0);
            c.n_max = static_cast<int>(jc.contains("n_max") ? require_int(jc, "n_max") : 0);
            if (c.n_min < 0 || c.n_min >= c.n_max)
                throw FeederError("capacitor unit-count range invalid");
            c.steps.assign(static_cast<std::size_t>(c.n_max), c.y_unit);
            if (jc.contains("y_steps_pu")) {
                // Optional non-uniform step table; overrides the uniform unit.
                const auto& arr = jc["y_steps_pu"];
                if (!arr.is_array() || static_cast<int>(arr.size()) != c.n_max)
                    throw FeederError("y_steps_pu must list one admittance per switching step");
                for (std::size_t p = 0; p < arr.size(); ++p) {
                    if (!arr[p].is_number() || arr[p].get<double>() <= 0)
                        throw FeederError("capacitor step admittances must be positive");
                    c.steps[p] = arr[p].get<double>();
                }
            }
            f.caps.push_back(c);
        }
    }

    // Sort device lists by canonical position so iteration order is stable.
    std::sort(f.ders.begin(), f.ders.end(), [](const DerSite& a, const DerSite& b) { return a.node < b.node; });
    std::sort(f.caps.begin(), f.caps.end(), [](const CapSite& a, const CapSite& b) { return a.node < b.node; });
    std::sort(f.oltcs.begin(), f.oltcs.end(), [](const OltcSite& a, const OltcSite& b) { return a.branch < b.branch; });

    return f;
}

Feeder parse_feeder_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FeederError("cannot open feeder document: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_feeder(ss.str());
}

LoadProfile parse_profile(const std::string& csv_text, const Feeder& feeder) {
    LoadProfile prof;
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw FeederError("profile is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };

    const std::size_t want = 1 + 2 * static_cast<std::size_t>(feeder.n);
    const auto header = split(line);
    if (header.size() != want)
        throw FeederError("shape mismatch: profile header has " + std::to_string(header.size()) +
                          " columns, expected " + std::to_string(want));

    // Columns are named PL_<id> / QL_<id> with document node ids; map each to
    // its canonical node so column order in the file is immaterial.
    std::vector<int> col_node(header.size(), -1);   // canonical node index 1..n
    std::vector<bool> col_is_p(header.size(), false);
    std::vector<bool> seen_p(static_cast<std::size_t>(feeder.n), false);
    std::vector<bool> seen_q(static_cast<std::size_t>(feeder.n), false);
    for (std::size_t cidx = 1; cidx < header.size(); ++cidx) {
        std::string h = header[cidx];
        h.erase(h.find_last_not_of(" \t\r") + 1);
        h.erase(0, h.find_first_not_of(" \t"));
        bool is_p = h.rfind("PL_", 0) == 0;
        bool is_q = h.rfind("QL_", 0) == 0;
        if (!is_p && !is_q) throw FeederError("malformed profile header column '" + h + "'");
        std::int64_t id = 0;
        try {
            id = std::stoll(h.substr(3));
        } catch (const std::exception&) {
            throw FeederError("malformed profile header column '" + h + "'");
        }
        const int node = feeder.index_of(id);
        if (node == 0) throw FeederError("profile lists the substation node");
        auto& seen = is_p ? seen_p : seen_q;
        if (seen[static_cast<std::size_t>(node - 1)])
            throw FeederError("duplicate profile column '" + h + "'");
        seen[static_cast<std::size_t>(node - 1)] = true;
        col_node[cidx] = node;
        col_is_p[cidx] = is_p;
    }

    int t = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != want)
            throw FeederError("shape mismatch: row " + std::to_string(t) + " has " +
                              std::to_string(cells.size()) + " columns, expected " + std::to_string(want));
        Vec p(feeder.n), q(feeder.n);
        for (std::size_t cidx = 1; cidx < cells.size(); ++cidx) {
            const std::string& cell = cells[cidx];
            std::size_t used = 0;
            double val = 0.0;
            try {
                val = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw FeederError("non-numeric cell '" + cell + "' at row " + std::to_string(t));
            }
            if (!std::isfinite(val))
                throw FeederError("non-finite load value at row " + std::to_string(t));
            (void)used;
            const int node = col_node[cidx];
            if (col_is_p[cidx])
                p[node - 1] = val;
            else
                q[node - 1] = val;
        }
        prof.p_load.push_back(std::move(p));
        prof.q_load.push_back(std::move(q));
        ++t;
    }
    prof.horizon = t;
    if (prof.horizon == 0) throw FeederError("profile has no data rows");
    return prof;
}

LoadProfile parse_profile_file(const std::string& path, const Feeder& feeder) {
    std::ifstream in(path);
    if (!in) throw FeederError("cannot open profile: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_profile(ss.str(), feeder);
}

}  // namespace vpo
