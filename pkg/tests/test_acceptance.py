"""Acceptance criteria C1-C10 at their stated tolerances.

Each test records one ``Cn PASS|FAIL`` line, printed in the terminal summary
(and directly when run as a script).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.optimize import bisect

from nhpartner import models as m
from nhpartner import spectra as sp
from nhpartner import topology as tp
from nhpartner import transforms as tf

from conftest import ACCEPTANCE_LINES

T2, T3, GAMMA = 1.0, 0.2, 4 / 3


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def gauge_valid_sample(rng, n):
    """Random NHSSH parameters with |t1| > |gamma|/2 and a nonzero gap on the contour."""
    out = []
    while len(out) < n:
        gamma = rng.uniform(0.0, 2.0)
        p = m.NhsshParams(rng.uniform(gamma / 2 + 0.05, 3.0), rng.uniform(0.1, 1.5),
                          rng.uniform(0.0, 1.0), gamma)
        g = tf.gauge_params(p.t1, p.gamma)
        up, lo = tf.partner_entries(g, p, tp.k_grid(4096))
        if min(np.abs(up).min(), np.abs(lo).min()) > 1e-3:
            out.append(p)
    return out


def test_c1_transition_values():
    start = time.perf_counter()
    roots = tp.transitions_analytic(T2, T3, GAMMA, (1.2, 2.0))
    want = [1.5660, 1.7050]
    analytic_ok = len(roots) == 2 and all(abs(r - w) <= 5e-4 for r, w in zip(roots, want))
    num = tp.transitions_numeric(m.NhsshParams(1.5, T2, T3, GAMMA), "t1", 1.2, 2.0,
                                 cells=200, samples=41)
    near = [min((abs(x - w) for x in num.values), default=math.inf) for w in want]
    elapsed = time.perf_counter() - start
    ok = analytic_ok and all(d <= 0.05 for d in near) and elapsed < 60
    report("C1", ok, f"analytic={[round(r, 7) for r in roots]} numeric N=200 minima="
           f"{[round(x, 4) for x in num.values]} distance to 1.5660/1.7050="
           f"{[round(d, 4) for d in near]} (tol 0.05) time={elapsed:.1f}s")


def _zero_mode_flip(t2, gamma, root, cells=200, tol=1e-4):
    def count(t1):
        h = m.obc_nhssh(m.NhsshParams(t1, t2, 0.0, gamma), cells)
        return sp.zero_modes(sp.eigenvalues(h), tol).count

    lo, hi = root - 0.3, root + 0.3
    if count(lo) != 2 or count(hi) != 0:
        return math.nan
    return bisect(lambda x: 1.0 if count(x) == 2 else -1.0, lo, hi, xtol=1e-4)


def test_c2_reduced_case():
    grid = [(1.0, 4 / 3), (0.8, 0.5), (1.2, 1.0), (0.6, 0.4), (1.5, 2.0)]
    lines, ok = [], True
    for t2, gamma in grid:
        want = math.sqrt(t2**2 + gamma**2 / 4)
        roots = tp.transitions_analytic(t2, 0.0, gamma, (gamma / 2 + 1e-9, 5.0))
        flip = _zero_mode_flip(t2, gamma, want)
        a_ok = len(roots) == 1 and abs(roots[0] - want) < 1e-6
        f_ok = abs(flip - want) <= 0.02
        ok &= a_ok and f_ok
        lines.append(f"(t2={t2:g},g={gamma:.3g}): root-exact={abs(roots[0] - want):.1e} "
                     f"flip-root={flip - want:+.3f}")
    report("C2", ok, "; ".join(lines) + " (tol 1e-6 / 0.02)")


def test_c3_similarity_invariance():
    start = time.perf_counter()
    n = 40
    p = m.NhsshParams(1.5, T2, T3, GAMMA)
    cases = {label: (m.obc_nhssh(p, n), tf.nhssh_transform(label, p, n))
             for label in ("s1", "s2", "s3")}
    soc = m.SocParams(1.0, 0.3, 0.8, 0.2, 0.4)
    cases["s4"] = (m.obc_soc(soc, n), tf.s4_transform(n, tf.soc_gauge(soc).phi))
    dw = m.DomainWallParams(0.8, 1.3, 1.0, 0.3, -0.2, nL=n // 2, nR=n // 2)
    cases["domain-wall"] = (m.domain_wall(dw), tf.domain_wall_transform(dw))
    imp = m.ImpurityParams(0.8, 1.0, 0.2, 0.5, cells=n)
    cases["impurity"] = (m.impurity_chain(imp), tf.impurity_transform(imp))
    errs = {}
    for label, (h, s) in cases.items():
        before = sp.eigenvalues(h)
        after = sp.eigenvalues(tf.apply_similarity(h, s))
        errs[label] = sp.spectral_distance(before, after) / sp.matrix_norm(h)
    elapsed = time.perf_counter() - start
    ok = all(e < 1e-9 for e in errs.values()) and elapsed < 10
    report("C3", ok, " ".join(f"{k}={v:.1e}" for k, v in errs.items())
           + f" (tol 1e-9) time={elapsed:.1f}s")


def test_c4_invariant_consistency():
    rng = np.random.default_rng(4)
    sample = gauge_valid_sample(rng, 10)
    worst_branch, worst_resid, mismatches = 0.0, 0.0, 0
    for p in sample:
        w = tp.winding_numbers(p, 2048)
        mismatches += round(w.nu_q_branch * 2) / 2 != (w.w_minus - w.w_plus) / 2
        worst_branch = max(worst_branch, abs(w.nu_q_branch - w.nu_q))
        worst_resid = max(worst_resid, w.quantization_residual)
    herm = [tp.winding_numbers(m.NhsshParams(p.t1, p.t2, p.t3, 0.0)).nu_e for p in sample]
    ok = mismatches == 0 and worst_resid < 1e-3 and all(v == 0 for v in herm)
    report("C4", ok, f"nu_Q mismatches={mismatches}/10 max|branch-(w- - w+)/2|={worst_branch:.1e} "
           f"max residual={worst_resid:.1e} hermitian nu_E={sorted(set(herm))}")


def test_c5_bulk_boundary():
    xs = np.linspace(1.2, 2.0, 50)
    p = m.NhsshParams(1.5, T2, T3, GAMMA)
    d = tp.sweep(p, "t1", xs, ("zero_modes", "nu_q"), cells=100, zero_tol=1e-4)
    topo = np.array([abs(r.get("nu_q", math.nan)) == 1 for r in d.rows])
    pairs = np.array([r["zero_modes"] >= 2 for r in d.rows])
    bad = np.flatnonzero(topo != pairs)
    steps = np.flatnonzero(np.diff(topo.astype(int)) != 0)
    near = all(any(abs(i - s) <= 1 or abs(i - s - 1) <= 1 for s in steps) for i in bad)
    ok = near and len(bad) <= len(steps)
    zm_edge = xs[pairs][-1] if pairs.any() else math.nan
    report("C5", ok, f"|nu_Q|=1 cells={int(topo.sum())} zero-mode-pair cells={int(pairs.sum())} "
           f"(last at t1={zm_edge:.3f}) disagreeing cells={len(bad)} "
           f"nu_Q values={sorted({r.get('nu_q') for r in d.rows})}")


def test_c6_skin_effect():
    def summary(p):
        s = sp.eigendecompose(m.obc_nhssh(p, 100))
        return sp.localization(s, edge_cells=10).skin_summary

    one = summary(m.NhsshParams(1.5, 1.0, 0.0, GAMMA))
    balanced = summary(m.NhsshParams(1.5, 0.7, 0.7, GAMMA))
    frac = max(one.fraction_left, one.fraction_right)
    ok = frac >= 0.95 and max(balanced.fraction_left, balanced.fraction_right) <= 0.10
    report("C6", ok, f"t3=0: {frac:.2%} on the {one.edge} edge; t2=t3: left="
           f"{balanced.fraction_left:.2%} right={balanced.fraction_right:.2%}")


def test_c7_soc_blocks():
    rng = np.random.default_rng(7)
    worst_off, mismatch, details = 0.0, 0, []
    for _ in range(5):
        t = rng.uniform(0.6, 1.4)
        p = m.SocParams(t, rng.uniform(0.0, 0.4 * t), rng.uniform(0.3, 2.0),
                        rng.uniform(0.0, 0.6), rng.uniform(0.0, 0.6),
                        rng.choice(["dresselhaus", "rashba"]))
        for k in tp.k_grid(64):
            blocks = tf.soc_block_decompose(tp.soc_partner_bloch(p, k))
            worst_off = max(worst_off, blocks.residual)
        try:
            w = tp.soc_winding(p, 2048)
            predicted = 2 * (abs(w.up.nu_q) + abs(w.down.nu_q))
        except (ArithmeticError, ValueError) as exc:
            predicted = type(exc).__name__
        h = m.obc_soc(p, 60)
        zm = sp.zero_modes(sp.eigenvalues(h), sp.default_zero_tol(h)).count
        mismatch += predicted != zm
        details.append(f"{predicted}/{zm}")
    q = m.SocParams(1.1, 0.3, 0.8)
    copies = np.concatenate([sp.eigenvalues(m.obc_nhssh(m.NhsshParams(1.1, 0.8, 0, 0.6), 40))] * 2)
    doubled = sp.spectral_distance(sp.eigenvalues(m.obc_soc(q, 40)), copies)
    ok = worst_off < 1e-12 and doubled < 1e-10 and mismatch == 0
    report("C7", ok, f"off-block={worst_off:.1e} doubled-spectrum={doubled:.1e} "
           f"winding/zero-mode (N=60)={details}")


def test_c8_domain_wall():
    base = m.DomainWallParams(1.0, 0.6, 1.0, 0.3, -0.2, nL=80, nR=80)
    herm = tf.hermiticity_residual(tf.apply_similarity(m.domain_wall(base),
                                                       tf.domain_wall_transform(base)))
    xs = np.round(np.arange(0.80, 1.2001, 0.01), 10)
    counts = [tp.interface_modes(tp.with_axis(base, "tL", float(x)), energy_tol=1e-3,
                                 weight=0.8) for x in xs]
    toggles = [float(0.5 * (xs[i] + xs[i + 1])) for i in range(len(xs) - 1)
               if counts[i] != counts[i + 1]]
    ok = herm < 1e-10 and len(toggles) == 1 and abs(toggles[0] - base.t2) <= 0.03
    report("C8", ok, f"hermiticity={herm:.1e} toggles at tL={[round(t, 3) for t in toggles]} "
           f"(t2=1, tol 0.03) interface modes {counts[0]}->{counts[-1]}")


def test_c9_impurity():
    clean = m.ImpurityParams(0.8, 1.0, 0.2, 0.0, cells=200)
    same = np.max(np.abs(m.impurity_chain(clean) - m.obc_nhssh(m.impurity_as_nhssh(clean), 200)))
    dirty = m.ImpurityParams(0.8, 1.0, 0.2, 0.5, cells=200)
    ht = tf.apply_similarity(m.impurity_chain(dirty), tf.impurity_transform(dirty))
    herm = tf.hermiticity_residual(ht)
    v_kept = np.array_equal(np.diag(ht), np.diag(m.impurity_chain(dirty)))
    num = tp.transitions_numeric(dirty, "t", 0.5, 1.5, cells=200, samples=51)
    dist = min((abs(x - 1.0) for x in num.values), default=math.inf)
    ok = same < 1e-12 and herm < 1e-12 and v_kept and dist <= 0.02
    report("C9", ok, f"v=0 diff={same:.1e} hermiticity={herm:.1e} v unchanged={v_kept} "
           f"numeric={[round(x, 4) for x in num.values]} |t-t'|={dist:.4f} (tol 0.02)")


def test_c10_partner_spectrum():
    rng = np.random.default_rng(10)
    sample = gauge_valid_sample(rng, 3)
    ks = tp.k_grid(256)
    lines, ok = [], True
    for p in sample:
        g = tf.gauge_params(p.t1, p.gamma)
        up, lo = tf.partner_entries(g, p, ks)
        e = np.sqrt(up * lo)
        pbc = np.concatenate([e, -e])
        h = m.obc_nhssh(p, 200)
        dist = sp.hausdorff_one_sided(pbc, sp.eigenvalues(h))
        limit = 0.05 * sp.matrix_norm(h)
        ok &= dist < limit
        lines.append(f"(t1={p.t1:.2f},t2={p.t2:.2f},t3={p.t3:.2f},g={p.gamma:.2f}) "
                     f"{dist:.3f} vs {limit:.3f}")
    report("C10", ok, "Hausdorff vs 0.05|H|: " + "; ".join(lines))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
