#include "flipwalk/error.hpp"
#include "flipwalk/flownet.hpp"

#include <functional>

namespace flipwalk {

namespace {

// groups as apex intervals [lo, hi], split with the left half taking the ceiling
struct Split {
    int depth, lo, mid, hi;  // left [lo, mid], right [mid + 1, hi]
};

std::vector<Split> dyadic_splits(int n) {
    std::vector<Split> out;
    std::function<void(int, int, int)> rec = [&](int lo, int hi, int d) {
        if (lo >= hi) return;
        int g = hi - lo + 1;
        int mid = lo + (g + 1) / 2 - 1;
        out.push_back({d, lo, mid, hi});
        rec(lo, mid, d + 1);
        rec(mid + 1, hi, d + 1);
    };
    rec(1, n, 0);
    return out;
}

Rational as_rational(const BigCount& c) { return Rational(c); }

void finish(PairingResult& r) {
    r.total = 0;
    r.overall_max = 0;
    for (const auto& x : r.level_max) {
        r.total += x;
        if (x > r.overall_max) r.overall_max = x;
    }
}

}  // namespace

PairingResult hierarchical_pairing_closed_form(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "pairing needs n >= 1");
    PairingResult r;
    r.n = n;
    for (const auto& s : dyadic_splits(n)) {
        if (static_cast<int>(r.level_max.size()) <= s.depth) r.level_max.resize(s.depth + 1, Rational(0));
        BigCount gsize = 0;
        for (int a = s.lo; a <= s.hi; ++a) gsize += oriented_class_size(n, a);
        for (int l = s.lo; l <= s.mid; ++l)
            for (int q = s.mid + 1; q <= s.hi; ++q) {
                Rational v = as_rational(oriented_class_size(n, l) * oriented_class_size(n, q)) /
                             as_rational(gsize * oriented_matching_size(n, l, q));
                v.canonicalize();
                if (v > r.level_max[s.depth]) r.level_max[s.depth] = v;
            }
    }
    finish(r);
    return r;
}

PairingResult hierarchical_pairing_flow(RecursiveFlowBuilder& b, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "pairing needs n >= 1");
    const Graph& G = b.graph(n).graph;
    const ClassPartition& P = b.partition(n);
    const Rational cn(catalan(n));
    std::vector<Rational> size(n + 1);
    for (int a = 1; a <= n; ++a) size[a] = Rational(static_cast<unsigned long>(P.classes[a - 1].members.size()));
    const auto splits = dyadic_splits(n);

    auto group_size = [&](int lo, int hi) {
        Rational s = 0;
        for (int a = lo; a <= hi; ++a) s += size[a];
        return s;
    };
    // unit-scaled exchange from one half of a group to the other
    auto exchange = [&](int alo, int ahi, int blo, int bhi, const Rational& g) {
        ArcFlow phi(G);
        for (int l = alo; l <= ahi; ++l)
            for (int q = blo; q <= bhi; ++q) phi.add_scaled(b.transfer(n, l, q), size[l] * size[q] / g);
        return phi;
    };

    PairingResult r;
    r.n = n;
    ArcFlow total(G);
    bool ok = true;
    for (int i = 1; i <= n; ++i) {
        ArcFlow f(G);
        for (const auto& s : splits) {
            if (i < s.lo || i > s.hi) continue;
            Rational g = group_size(s.lo, s.hi);
            bool left = i <= s.mid;
            int alo = left ? s.lo : s.mid + 1, ahi = left ? s.mid : s.hi;
            int blo = left ? s.mid + 1 : s.lo, bhi = left ? s.hi : s.mid;
            f.add_scaled(exchange(alo, ahi, blo, bhi, g), cn * size[i] / group_size(alo, ahi));
        }
        // surplus C_n on the source class, demand |C_i| everywhere
        auto d = f.divergence();
        for (std::size_t v = 0; v < G.num_vertices(); ++v) {
            Rational want = -size[i];
            if (static_cast<int>(P.vertex_class[v]) + 1 == i) want += cn;
            if (d[v] != want) ok = false;
        }
        if (!f.nonnegative()) ok = false;
        ++r.commodities_checked;
        total += f;
    }
    r.certified = ok;
    int depth = 0;
    for (const auto& s : splits) depth = std::max(depth, s.depth + 1);
    r.level_max.assign(depth, Rational(0));
    for (const auto& s : splits)
        for (int l = s.lo; l <= s.hi; ++l)
            for (int q = s.lo; q <= s.hi; ++q) {
                if ((l <= s.mid) == (q <= s.mid)) continue;
                for (auto a : b.matching_arcs(n, l, q)) {
                    Rational v = total[a] / cn;
                    if (v > r.level_max[s.depth]) r.level_max[s.depth] = v;
                }
            }
    finish(r);
    return r;
}

nlohmann::json to_json(const PairingResult& r) {
    nlohmann::json j;
    j["n"] = r.n;
    auto lv = nlohmann::json::array();
    for (const auto& x : r.level_max) lv.push_back({{"exact", x.get_str()}, {"value", x.get_d()}});
    j["levels"] = lv;
    j["total"] = {{"exact", r.total.get_str()}, {"value", r.total.get_d()}};
    j["overall_max"] = {{"exact", r.overall_max.get_str()}, {"value", r.overall_max.get_d()}};
    j["certified"] = r.certified;
    j["commodities_checked"] = r.commodities_checked;
    return j;
}

}  // namespace flipwalk
