"""Acceptance criteria, one test each.

Every test records a single "[criterion N] PASS/FAIL: ..." line, printed in
the pytest terminal summary, and then asserts.
"""
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

from bgpa import builders
from bgpa.boxes import cond_exp, include, matrix_unit, tau_l, tau_r, tr_m, traces
from bgpa.graded import (
    E_S_T, GradedContext, Tr, beta_theta_check, compress, coset_data, phi_f, property_suite,
)
from bgpa.graph import Edge, WeightedGraph, enumerate_paths, validate_weight
from bgpa.hecke import (
    AxiomFailure, coboundary_twist, corrupt, crossed_product, hecke_structure_constants, named_pair,
    permutation_action, trivial_action, twisted_degenerates, validate_cocycle,
)
from bgpa.scalars import QScalar
from bgpa.spectral import (
    amenability_verdict, bratteli_P, bratteli_Q, graph_norm, tree_ball_sequence, tree_norm_closed_form,
)
from bgpa.symmetry import ExplicitAction, check_spherical, fixed_point_dim

from conftest import ACCEPTANCE_LINES, random_box


def report(n: int, ok: bool, detail: str):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


FINITE = {"diagonal(Z2)": lambda: builders.diagonal("Z2"), "bh(S3)": builders.bh_s3,
          "multi_edge(4)": lambda: builders.multi_edge(4)}


def test_criterion_1_weight_axioms():
    cases = [("diagonal(Z2)", lambda: builders.diagonal("Z2"), QScalar(2)),
             ("bh(S3)", builders.bh_s3, QScalar.sqrt_of(6)),
             ("tree(3,3) r=12", lambda: builders.biregular_tree(3, 3, 12), QScalar(3)),
             ("multi_edge(4)", lambda: builders.multi_edge(4), QScalar(4))]
    ok, notes = True, []
    for name, make, delta in cases:
        t0 = time.perf_counter()
        g = make().graph
        rep = validate_weight(g)
        elapsed = time.perf_counter() - t0
        pairs = all(g.mu_oe(2 * i) * g.mu_oe(2 * i + 1) == 1 for i in range(len(g.edges)))
        good = rep.ok and rep.exact and rep.delta == delta and pairs and elapsed < 1.0
        ok &= good
        notes.append(f"{name} delta={rep.delta} {elapsed:.2f}s{'' if good else ' BAD'}")
    report(1, ok, "; ".join(notes))


def test_criterion_2_trace_identities():
    t0 = time.perf_counter()
    rng = random.Random(2)
    ok = True
    for name, make in FINITE.items():
        g = make().graph
        for sign in "+-":
            # the iff, forward direction: a valid weight has mu(a) = mu(b) on every ST pair
            ok &= all(g.path_mu(a) == g.path_mu(b) for a, b in enumerate_paths(g, 2, sign).st_pairs)
        for i in range(100):
            sign = "+-"[i % 2]
            x, y = random_box(g, 2, sign, rng), random_box(g, 2, sign, rng)
            tl, tr, trm = traces(x)
            exp_l, exp_r = {}, {}
            for (a, b), v in x.entries.items():
                if a == b:
                    m = g.path_mu(a)
                    exp_l[g.path_target(a)] = exp_l.get(g.path_target(a), 0) + Fraction(v) / m
                    exp_r[a[0]] = exp_r.get(a[0], 0) + v * m
            ok &= all(tl[k] == val for k, val in exp_l.items())
            ok &= all(tr[k] == val for k, val in exp_r.items())
            ok &= trm.equals(tr.scale(1 / (g.delta * g.delta)))
            xy, yx = x * y, y * x
            ok &= tau_r(xy).equals(tau_r(yx)) and tau_l(xy).equals(tau_l(yx))
    # the iff, reverse direction: unequal weights on an ST pair break traciality
    edges = [Edge("a", "x", "y", 1), Edge("b", "x", "y", 2)]
    bad = WeightedGraph(["x"], ["y"], edges, {"a": QScalar(1), "b": QScalar(2)}, delta=QScalar(3))
    a, b = bad.paths_from(0, 1)
    eab, eba = matrix_unit(bad, a, b), matrix_unit(bad, b, a)
    witness = not tau_r(eab * eba).equals(tau_r(eba * eab)) and not validate_weight(bad).ok
    ok &= witness
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    report(2, ok, f"100 pairs x 3 builders exact and tracial, non-tracial witness={witness}, {elapsed:.2f}s")


def test_criterion_3_conditional_expectation_pins():
    rng = random.Random(3)
    ok = True
    count = 0
    for name, make in FINITE.items():
        g = make().graph
        for i in range(100):
            n, sign = 1 + i % 3, "+-"[i % 2]
            x, y = random_box(g, n - 1, sign, rng), random_box(g, n, sign, rng)
            ok &= tr_m(cond_exp(y)).equals(tr_m(y))
            ok &= cond_exp(include(x) * y).equals(x * cond_exp(y))
            count += 1
    report(3, ok, f"tr_n(E_P(y)) = tr_(n+1)(y) and E_P(include(x) y) = x E_P(y) exact on {count} pairs, n <= 3")


def test_criterion_4_nonamenability_certificate():
    t0 = time.perf_counter()
    b = builders.biregular_tree(3, 3, 12)
    v = amenability_verdict(b.graph, b.action, b.info)
    closed = tree_norm_closed_form(3, 3)
    (_, ball), = tree_ball_sequence(3, 3, [12])
    elapsed = time.perf_counter() - t0
    gap = closed - ball
    upper_ok = abs(v.gamma_norm.upper - 2 * math.sqrt(2)) < 1e-12 and closed < 3
    verdict_ok = v.verdict == "NonAmenableCertified"
    cross_ok = 0 <= gap <= 0.03
    ok = upper_ok and verdict_ok and cross_ok and elapsed < 10.0
    detail = (f"upper 2*sqrt(2)={closed:.6f} < 3, verdict {v.verdict}, {elapsed:.2f}s; "
              f"radius-12 ball lower bound {ball:.6f} leaves gap {gap:.4f}")
    if not cross_ok:
        # the ball spectral radius approaches the closed form with a gap of order
        # 1/r^2: 0.056 at radius 12, first below 0.03 at radius 18 (0.0292)
        detail += " > 0.03 (ball bounds converge too slowly at radius 12; upper bound and verdict hold)"
    report(4, ok, detail)


def test_criterion_5_inequality_chain():
    examples = {"diagonal(Z2)": builders.diagonal("Z2"), "diagonal(S3)": builders.diagonal("S3"),
                "bh(S3)": builders.bh_s3(), "multi_edge(3,S3)": builders.multi_edge(3, True),
                "tree(3,3) r=6": builders.biregular_tree(3, 3, 6)}
    ok, notes = True, []
    for name, b in examples.items():
        gamma = graph_norm(b.graph, b.info).upper
        worst = -math.inf
        for n in range(5):
            q = bratteli_Q(b.graph, b.action, n).norm()
            p = bratteli_P(b.graph, n).norm()
            worst = max(worst, q - p, p - gamma)
        ok &= worst <= 1e-9
        notes.append(f"{name} max violation {worst:.1e}")
    report(5, ok, "; ".join(notes))


def test_criterion_6_amenable_finite_case():
    b = builders.diagonal("Z2")
    v = amenability_verdict(b.graph, b.action, b.info, n_max=4)
    q4 = dict(v.q_norms)[4]
    ok = v.verdict == "AmenableObserved" and abs(q4 - 2) < 1e-6
    report(6, ok, f"||Gamma(Q)_4|| = {q4:.12f}, delta = 2, verdict {v.verdict}")


def test_criterion_7_fixed_point_dimensions():
    t0 = time.perf_counter()
    d = builders.diagonal("Z2")
    diag = [fixed_point_dim(d.graph, d.action, n) for n in (1, 2)]
    t = builders.biregular_tree(3, 3, 6)
    tree = [fixed_point_dim(t.graph, t.action, n) for n in range(1, 5)]
    tl = [builders.tl_dim_oracle(n) for n in range(1, 5)]
    elapsed = time.perf_counter() - t0
    ok = diag == [2, 8] and tree == tl == [1, 2, 5, 14] and elapsed < 30.0
    detail = f"diagonal(Z2) {diag}; tree(3,3) {tree} vs TL oracle {tl}; {elapsed:.2f}s"
    if tree != tl:
        # the root stabilizer of the ball is generated by sibling-subtree swaps, and
        # its orbits on rooted ST_n pairs outnumber TL diagrams from n = 2; an
        # independent union-find oracle in test_symmetry gives the same 1, 3, 12, 55
        detail += " (rooted-ball orbit counts exceed the TL count from n = 2)"
    report(7, ok, detail)


def test_criterion_8_sphericality():
    ok, notes = True, []
    for name, b in [("diagonal(Z2)", builders.diagonal("Z2")), ("bh(S3)", builders.bh_s3()),
                    ("tree(3,3)", builders.biregular_tree(3, 3, 6))]:
        rep = check_spherical(b.graph, b.action)
        ok &= rep.spherical and rep.counting_matches_traces
        notes.append(f"{name} spherical={rep.spherical}")
    bh = builders.bh_s3()
    g1 = bh.graph.with_mu({e.id: 1 for e in bh.graph.edges}, delta=3)
    a1 = ExplicitAction(g1, bh.action.generator_maps(), base_vertex=bh.action.base_vertex)
    rep = check_spherical(g1, a1)
    ok &= not rep.spherical and rep.counting_matches_traces
    notes.append(f"bh with mu=1 spherical={rep.spherical}; counting agrees with traces")
    report(8, ok, "; ".join(notes))


def test_criterion_9_graded_suite():
    t0 = time.perf_counter()
    res = property_suite(builders.diagonal("Z2"), n_max=6, samples=200, seed=9)
    elapsed = time.perf_counter() - t0
    keys = ["degree_complete", "associative", "tracial", "Tr_p_v", "loop_factorization", "gram_psd",
            "Tr_sigma_c_g"]
    ok = res["ok"] and all(res[k] for k in keys) and res["gram_min_eig"] >= -1e-8 and elapsed < 60.0
    report(9, ok, f"{', '.join(k for k in keys if res[k])} on 200 samples, "
                  f"{res['n_loops']} loops, Gram min eig {res['gram_min_eig']:.3g}, {elapsed:.2f}s")


def test_criterion_10_phi_and_theta():
    b = builders.diagonal("Z2")
    ctx = GradedContext(b.graph, 0, n_max=6)
    cd = coset_data(ctx, b.action)
    rng = random.Random(10)
    degs = [(0, 0), (1, 0), (0, 1), (1, 1)]
    ok = True
    r = len(cd.orbit_reps)
    indicator = [1] + [0] * (r - 1)  # the indicator of G_o on the double cosets
    for _ in range(10):
        x = ctx.random_element(rng, degs, 0.5)
        ok &= phi_f(x, cd, indicator).equals(E_S_T(x))
        ok &= Tr(phi_f(x, cd, [1] + [Fraction(1, 3)] * (r - 1))) == Tr(x)
    o = cd.base
    for rep in cd.orbit_reps:
        y = compress(ctx.random_element(rng, degs, 0.8), o, rep)
        ok_beta, ok_l2, scale2 = beta_theta_check(y, b.action, cd, cd.transversal[rep])
        ok &= ok_beta and ok_l2 and scale2 == Fraction(1, 1) / Tr(ctx.p(o))
    report(10, ok, "phi_(1_Go) = E^S_T, Tr(phi_f) = Tr, beta(Theta_g y) = sqrt(index / Tr(p_o)) y exact")


def test_criterion_11_hecke():
    t0 = time.perf_counter()
    s3s2 = named_pair("S3/S2")
    h = next(i for i, d in enumerate(s3s2.double_cosets) if s3s2.group.identity in d)
    c = hecke_structure_constants(s3s2, 1 - h, 1 - h)
    ok = len(s3s2.double_cosets) == 2 and c[h] == 4 and c[1 - h] == 2
    notes = [f"S3/S2 {len(s3s2.double_cosets)} double cosets, 1_T*1_T = {c[h]}*1_H + {c[1 - h]}*1_T"]
    for name in ["S3/S2", "S3/1", "Z4/Z2", "S4/S3", "S4/S2"]:
        ctx = named_pair(name)
        act = permutation_action(ctx)
        cp = crossed_product(ctx, act, False)
        ver = cp.verify()
        phi = cp.verify_phi()
        deg = twisted_degenerates(ctx, act, samples=5)
        good = all(v for k, v in ver.items() if k != "dim") and all(v for k, v in phi.items() if k != "dim")
        ok &= good and deg and ver["omega_positive_definite"]
        notes.append(f"{name} dim {cp.dim} {'ok' if good and deg else 'BAD'}")
    triv = crossed_product(s3s2, trivial_action(s3s2), False)
    ok &= all(v for k, v in triv.verify().items() if k != "dim")
    base = permutation_action(s3s2)
    g = next(x for x in s3s2.group.elements if x != s3s2.group.identity)
    rep = validate_cocycle(corrupt(base, g, 0, 1))
    rejected = False
    try:
        crossed_product(s3s2, corrupt(base, g, 0, 1), True)
    except AxiomFailure:
        rejected = True
    ok &= not rep.ok and rep.axiom == 5 and bool(rep.witness) and rejected
    notes.append(f"corrupted cocycle rejected at axiom ({rep.axiom}) with witness {rep.witness}")
    one = base.algebra.one()
    tw = coboundary_twist(base, [one] * s3s2.n_cosets)
    ok &= validate_cocycle(tw).ok
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    report(11, ok, "; ".join(notes) + f"; {elapsed:.2f}s")


CLI_RUNS = [
    ["validate", "--builder", "tree", "--radius", "8"],
    ["weights", "--builder", "bh"],
    ["dims", "--builder", "diagonal", "--n", "2"],
    ["bratteli", "--builder", "bh", "--n", "2"],
    ["norms", "--builder", "diagonal", "--group", "S3", "--n", "3"],
    ["amenability", "--builder", "tree", "--radius", "6"],
    ["hecke", "--builder", "bh"],
    ["hecke", "--builder", "diagonal", "--pair", "S4/S3"],
    ["graded-check", "--builder", "diagonal", "--samples", "10"],
    ["report", "--builder", "multi_edge", "--edges", "3", "--with-group", "--n", "2", "--samples", "4"],
]


def test_criterion_12_cli_determinism():
    ok, notes = True, []
    for argv in CLI_RUNS:
        cmd = [sys.executable, "-m", "bgpa", *argv, "--seed", "12"]
        outs = [subprocess.run(cmd, capture_output=True, timeout=300) for _ in range(2)]
        same = outs[0].stdout == outs[1].stdout and outs[0].returncode == outs[1].returncode
        ok &= same and outs[0].returncode == 0 and len(outs[0].stdout) > 0
        notes.append(f"{argv[0]}:{'same' if same else 'DIFFERS'}")
    report(12, ok, "byte-identical reruns with seed 12: " + " ".join(notes))
