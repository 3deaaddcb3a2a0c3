#!/usr/bin/env python3
"""Regenerates the feeder and profile fixtures in this directory.

Topology and device inventories follow the published single-phase-equivalent
test cases (13-node: caps at 7 and 11, tap changer on branch 3-12, DERs at
5, 7, 8, 10, 11, 12; 37-node: caps at 724/725/728/732/736/741, DERs at
714/731/734/744/775, head regulator). Impedances and loads are this
repository's own per-unit equivalents.
"""
import json, os

HERE = os.path.dirname(os.path.abspath(__file__))

def write(name, obj):
    with open(os.path.join(HERE, name), "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")

def node(nid, v_min=0.81, v_max=1.21, v_lo=0.9604, v_hi=1.0404, alpha=0.001):
    return {"id": nid, "v_min": v_min, "v_max": v_max, "v_lo": v_lo, "v_hi": v_hi,
            "alpha": alpha}

def branch(bid, frm, to, r, x):
    return {"id": bid, "from": frm, "to": to, "r_pu": r, "x_pu": x}

# ---------------------------------------------------------------- 13 node
ieee13 = {
    "name": "ieee13-equivalent",
    "base_mva": 5.0,
    "base_kv": 4.16,
    "v0_pu": 1.0,
    "nodes": [node(i) for i in range(1, 13)],
    "branches": [
        branch(0, 0, 1, 0.0072, 0.0216),
        branch(1, 1, 2, 0.0090, 0.0180),
        branch(2, 2, 3, 0.0108, 0.0216),
        branch(3, 3, 12, 0.0, 0.0),        # regulator
        branch(4, 12, 4, 0.0504, 0.0504),
        branch(5, 4, 5, 0.0504, 0.0403),
        branch(6, 4, 6, 0.0554, 0.0554),
        branch(7, 6, 7, 0.2100, 0.1400),
        branch(8, 6, 8, 0.0554, 0.0353),
        branch(9, 2, 9, 0.0378, 0.0594),
        branch(10, 9, 10, 0.0648, 0.0486),
        branch(11, 9, 11, 0.0540, 0.0432),
    ],
    "ders": [{"node": i, "q_min_pu": -0.02, "q_max_pu": 0.02} for i in (5, 7, 8, 10, 11, 12)],
    "oltcs": [{"branch": 3, "tau": 0.00625, "n_min": -16, "n_max": 16}],
    "caps": [{"node": 7, "y_c_pu": 0.01, "n_min": 0, "n_max": 10},
             {"node": 11, "y_c_pu": 0.01, "n_min": 0, "n_max": 10}],
}
write("ieee13.json", ieee13)

P13 = {1: .02, 2: .03, 3: .02, 4: .05, 5: .07, 6: .03, 7: .08, 8: .06,
       9: .04, 10: .07, 11: .08, 12: .02}
Q13 = {1: .008, 2: .012, 3: .010, 4: .020, 5: .030, 6: .012, 7: .035, 8: .025,
       9: .015, 10: .030, 11: .035, 12: .008}

SHAPE = [.52, .49, .47, .46, .46, .48, .53, .60, .66, .70, .73, .75,
         .76, .78, .80, .83, .88, .94, 1.0, .98, .92, .82, .70, .58]
BELL = [0, 0, 0, 0, 0, .05, .15, .30, .50, .70, .85, .95,
        1.0, .95, .85, .70, .50, .30, .15, .05, 0, 0, 0, 0]
PV13 = {5: .18, 7: .20, 8: .15, 10: .18, 11: .20, 12: .06}

def profile_csv(name, nodes, P, Q, rows):
    hdr = "t," + ",".join(f"PL_{i}" for i in nodes) + "," + ",".join(f"QL_{i}" for i in nodes)
    lines = [hdr]
    for t, (sp, sq) in enumerate(rows):
        p = [f"{P[i]*sp(i, t):.6f}" for i in nodes]
        q = [f"{Q[i]*sq(i, t):.6f}" for i in nodes]
        lines.append(f"{t}," + ",".join(p) + "," + ",".join(q))
    with open(os.path.join(HERE, name), "w") as f:
        f.write("\n".join(lines) + "\n")

n13 = list(range(1, 13))
profile_csv("ieee13_day.csv", n13, P13, Q13,
            [((lambda i, t, s=s: s), (lambda i, t, s=s: s)) for s in SHAPE])

def pv_factor(i, t):
    return (P13[i] * SHAPE[t] - PV13.get(i, 0.0) * BELL[t]) / P13[i]
profile_csv("ieee13_pv.csv", n13, P13, Q13,
            [((lambda i, t=t: pv_factor(i, t)), (lambda i, t=t: SHAPE[t])) for t in range(24)])

# ---------------------------------------------------------------- 37 node
edges = [
    (799, 701, .0050, .0100),   # head regulator branch (zero-impedance, see below)
    (701, 702, .0044, .0088),
    (702, 705, .0100, .0080),
    (702, 713, .0090, .0072),
    (702, 703, .0052, .0104),
    (703, 727, .0096, .0076),
    (703, 730, .0070, .0140),
    (730, 709, .0060, .0120),
    (709, 708, .0076, .0112),
    (709, 731, .0120, .0096),
    (709, 775, .0020, .0100),
    (708, 733, .0088, .0092),
    (708, 732, .0132, .0100),
    (733, 734, .0096, .0100),
    (734, 737, .0108, .0088),
    (734, 710, .0128, .0096),
    (737, 738, .0092, .0076),
    (738, 711, .0088, .0072),
    (711, 741, .0112, .0084),
    (711, 740, .0100, .0080),
    (710, 735, .0108, .0084),
    (710, 736, .0124, .0092),
    (713, 704, .0088, .0092),
    (704, 714, .0092, .0072),
    (704, 720, .0104, .0104),
    (714, 718, .0112, .0084),
    (720, 707, .0124, .0100),
    (720, 706, .0096, .0080),
    (707, 724, .0140, .0104),
    (707, 722, .0104, .0080),
    (706, 725, .0100, .0076),
    (705, 742, .0096, .0072),
    (705, 712, .0088, .0068),
    (727, 744, .0084, .0088),
    (744, 728, .0104, .0080),
    (744, 729, .0096, .0072),
]
edges[0] = (799, 701, 0.0, 0.0)  # ideal regulator at the head

nodes37 = sorted({e[1] for e in edges})
ieee37 = {
    "name": "ieee37-equivalent",
    "base_mva": 2.5,
    "base_kv": 4.8,
    "v0_pu": 1.0,
    "nodes": [node(i) for i in nodes37],
    "branches": [branch(k, e[0], e[1], e[2], e[3]) for k, e in enumerate(edges)],
    "ders": [{"node": i, "q_min_pu": -0.04, "q_max_pu": 0.04} for i in (714, 731, 734, 744, 775)],
    "oltcs": [{"branch": 0, "tau": 0.00625, "n_min": -16, "n_max": 16}],
    "caps": [{"node": i, "y_c_pu": 0.004, "n_min": 0, "n_max": 10}
             for i in (724, 725, 728, 732, 736, 741)],
}
write("ieee37.json", ieee37)

# Far laterals load-heavy so the head tap resolves a real trade-off.
P37, Q37 = {}, {}
deep = {711, 741, 740, 738, 737, 735, 736, 710, 734, 733, 724, 722, 728, 729}
mid = {708, 732, 731, 775, 707, 706, 725, 744, 727, 720, 714, 718}
for i in nodes37:
    if i in deep:
        P37[i] = .024; Q37[i] = .011
    elif i in mid:
        P37[i] = .016; Q37[i] = .007
    else:
        P37[i] = .008; Q37[i] = .0035
profile_csv("ieee37_day.csv", nodes37, P37, Q37,
            [((lambda i, t, s=s: s), (lambda i, t, s=s: s)) for s in SHAPE])

# ---------------------------------------------------------------- toys
write("onebranch.json", {
    "name": "onebranch",
    "base_mva": 5.0, "base_kv": 4.16, "v0_pu": 1.0,
    "nodes": [node(1)],
    "branches": [branch(0, 0, 1, 0.01, 0.02)],
    "ders": [{"node": 1, "q_min_pu": -0.1, "q_max_pu": 0.1}],
})
with open(os.path.join(HERE, "onebranch.csv"), "w") as f:
    f.write("t,PL_1,QL_1\n0,0.030000,0.040000\n")

write("threenode.json", {
    "name": "threenode",
    "base_mva": 5.0, "base_kv": 4.16, "v0_pu": 1.0,
    "nodes": [node(1), node(2)],
    "branches": [branch(0, 0, 1, 0.02, 0.04), branch(1, 1, 2, 0.03, 0.05)],
    "ders": [{"node": 1, "q_min_pu": -0.05, "q_max_pu": 0.05}],
    "caps": [{"node": 2, "y_c_pu": 0.02, "n_min": 0, "n_max": 3}],
})
with open(os.path.join(HERE, "threenode.csv"), "w") as f:
    f.write("t,PL_1,PL_2,QL_1,QL_2\n0,0.060000,0.080000,0.030000,0.040000\n")

write("oltc_toy.json", {
    "name": "oltc_toy",
    "base_mva": 5.0, "base_kv": 4.16, "v0_pu": 1.0,
    "nodes": [node(1), node(2)],
    "branches": [branch(0, 0, 1, 0.02, 0.04), branch(1, 1, 2, 0.0, 0.0)],
    "oltcs": [{"branch": 1, "tau": 0.00625, "n_min": -16, "n_max": 16}],
    "ders": [{"node": 2, "q_min_pu": -0.05, "q_max_pu": 0.05}],
})
with open(os.path.join(HERE, "oltc_toy.csv"), "w") as f:
    f.write("t,PL_1,PL_2,QL_1,QL_2\n0,0.050000,0.070000,0.020000,0.030000\n")

print("fixtures written")
