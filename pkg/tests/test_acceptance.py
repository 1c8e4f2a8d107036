"""Acceptance criteria 1-13. Each test prints one PASS/FAIL line; a summary is printed at the end of the run."""

import os
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

import pytest

from helpers import im_instance, oracle_instance, rng_of, operator_identities, transgression_instance
from weilalg.algebroid import cotangent_poisson, library, so3, tangent
from weilalg.cekalkman import abelian_translation, decomposition_check, so3_on_R3
from weilalg.cohomology import betti, bott_shulman_row_cohomology, ce_sym_betti, lie_constants
from weilalg.groupoid import compatibility_check, groupoid_library, pair_groupoid, random_normalized_form
from weilalg.imforms import (c1_determines, check_im, check_transgression, cocycle_from_tau, int_pr_equivalence)
from weilalg.polyforms import PolyForm
from weilalg.weilflat import check_d2

ROOT = Path(__file__).resolve().parent.parent
LIB = library()
GEOMETRIC = ["tangent1", "tangent2", "so3xR3", "poisson_x", "poisson_1+x^2"]


def verdict(n, ok, detail=""):
    print(f"acceptance {n:2d}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


def test_criterion_01_d2_certification():
    t0 = time.perf_counter()
    bad, counts = [], {}
    for name, P in LIB.items():
        rep = check_d2(P, seed=0, samples=20)
        counts[name] = rep.checked
        if not rep.ok:
            bad.append(name)
    elapsed = time.perf_counter() - t0
    neg = check_d2(so3().perturbed(0, 1, 0, 1), seed=0, samples=20)
    ok = not bad and elapsed < 60 and not neg.ok and "dh.dh" in neg.failed_identities()
    verdict(1, ok, f"library ok={not bad} checks={sum(counts.values())} time={elapsed:.1f}s negative control fails={not neg.ok}")


def test_criterion_02_oracle_equality():
    names, done, bad, seed = sorted(LIB), 0, 0, 0
    while done < 200:
        rep = oracle_instance(LIB[names[seed % len(names)]], rng_of(seed))
        seed += 1
        if rep is None:
            continue
        done += 1
        bad += not rep.ok
    verdict(2, bad == 0, f"instances={done} failures={bad}")


def test_criterion_03_vanest_compatibility():
    GL = groupoid_library()
    t0 = time.perf_counter()
    done, bad = 0, 0
    for seed in range(2):
        for name in ("pair1", "pair2", "RxR"):
            for p in range(4):
                for q in range(3):
                    w = random_normalized_form(GL[name], p, q, rng_of(1000 * seed + 10 * p + q))
                    if w.is_zero():
                        continue
                    done += 1
                    bad += not compatibility_check(w).ok
    elapsed = time.perf_counter() - t0
    verdict(3, bad == 0 and done >= 50 and elapsed < 300, f"instances={done} failures={bad} time={elapsed:.1f}s")


def test_criterion_04_operator_identities():
    GL = groupoid_library()
    names = sorted(GL)
    counts, fails, seed = Counter(), Counter(), 0
    while not counts or min(counts.values()) < 20 or len(counts) < 10:
        for label, ok in operator_identities(GL[names[seed % len(names)]], rng_of(seed)).items():
            counts[label] += 1
            fails[label] += not ok
        seed += 1
    verdict(4, not +fails, f"instances per identity >= {min(counts.values())} failing={sorted(+fails)}")


def test_criterion_05_weil_acyclicity():
    a = betti(LIB["so3"], "total", range(0, 5)).betti
    b = betti(LIB["heis3"], "total", range(0, 4)).betti
    verdict(5, a == [1, 0, 0, 0, 0] and b == [1, 0, 0, 0], f"so3={a} heis3={b}")


def test_criterion_06_rows_vs_symmetric_ce():
    rows = {}
    ok = True
    for name in ("so3", "heis3"):
        P = LIB[name]
        for q in range(3):
            row = betti(P, "row", range(0, 4 + q), q=q).betti
            ce = ce_sym_betti(lie_constants(P), P.rank, q, range(0, 4)).betti
            rows[(name, q)] = (row[q:], ce)
            ok = ok and row[:q] == [0] * q and row[q:] == ce
    verdict(6, ok, " ".join(f"{n}/q={q}:{r}" for (n, q), (r, _) in rows.items()))


def test_criterion_07_lie_algebra_cohomology():
    a = ce_sym_betti(lie_constants(LIB["so3"]), 3, 0).betti
    b = ce_sym_betti(lie_constants(LIB["heis3"]), 3, 0).betti
    verdict(7, a == [1, 0, 0, 1] and b == [1, 2, 2, 1], f"so3={a} heis3={b}")


def test_criterion_08_im_pipeline():
    ok = True
    for f in ("1", "x", "1 + x^2"):
        P = cotangent_poisson(f)
        tau = [PolyForm.parse(s, P.base) for s in ("dx", "dy")]
        eq = int_pr_equivalence(P, tau, None, 2)
        ok = ok and check_im(P, tau, None, 2).ok and eq.ok and eq.info["cocycle_ok"]
    T = tangent(3)
    zero = [PolyForm.zero(T.base)] * 3
    vol = PolyForm.parse("dx^dy^dz", T.base)
    eq = int_pr_equivalence(T, zero, vol, 2)
    ok = ok and eq.ok and not eq.info["equations_ok"] and not eq.info["cocycle_ok"]
    verdict(8, ok, "poisson f in {1, x, 1+x^2} pass; volume fails on both routes")


def test_criterion_09_c1_determinacy():
    done, bad, ks, seed = 0, 0, Counter(), 0
    while done < 30 or len(ks) < 2:
        P = LIB[GEOMETRIC[seed % len(GEOMETRIC)]]
        tau, phi, k = im_instance(P, rng_of(seed))
        seed += 1
        sigma = cocycle_from_tau(P, tau, phi, k)
        if sigma.is_zero():
            continue
        done += 1
        ks[k] += 1
        try:
            bad += c1_determines(P, sigma, phi) != sigma
        except Exception:
            bad += 1
    verdict(9, bad == 0, f"instances={done} by k={dict(sorted(ks.items()))} failures={bad}")


def test_criterion_10_transgression_dual_route():
    names = ["tangent2", "so3xR3", "poisson_x", "poisson_1+x^2"]
    done, disagree, passes, fails = 0, 0, 0, 0
    for seed in range(32):
        P = LIB[names[seed % len(names)]]
        l, tau = transgression_instance(P, rng_of(seed), perturb=seed % 2 == 1)
        rep = check_transgression(P, l, tau, 2, seed=seed)
        done += 1
        disagree += not rep.ok
        passes += rep.info["equations_ok"]
        fails += not rep.info["equations_ok"]
    verdict(10, disagree == 0 and passes and fails, f"instances={done} pass={passes} fail={fails} disagreements={disagree}")


def test_criterion_11_kalkman_decomposition():
    reps = [decomposition_check(G(), 2, 2, 1) for G in (so3_on_R3, abelian_translation)]
    verdict(11, all(r.ok and r.checked for r in reps), " ".join(f"{r.name}: {r.checked} checks" for r in reps))


def test_criterion_12_truncated_bott_shulman_witness():
    rows = {}
    for q in (0, 1):
        w = betti(LIB["tangent1"], "row", range(0, 3), q=q, D=2 + q, truncation="weight").betti
        g = bott_shulman_row_cohomology(pair_groupoid(1), q, 2, 2).betti
        rows[q] = (g, w)
    verdict(12, all(g == w for g, w in rows.values()),
            " ".join(f"q={q}: groupoid={g} weil={w}" for q, (g, w) in rows.items()))


CLI_RUNS = [
    ["check", "data/so3.json"], ["check", "data/so3-broken.json"], ["check", "data/heis3.json"],
    ["check", "data/tangent1.json"], ["check", "data/pair-groupoid.json"], ["check", "data/pair-groupoid-R2.json"],
    ["check", "data/action-groupoid.json"], ["check", "data/heisenberg-group.json"],
    ["cohomology", "data/so3.json", "--mode", "total", "--max-p", "4"],
    ["cohomology", "data/so3.json", "--mode", "row", "--q", "0"],
    ["cohomology", "data/tangent1.json", "--mode", "row", "--q", "1", "--poly-degree", "2"],
    ["cohomology", "data/pair-groupoid.json", "--mode", "row", "--q", "1", "--poly-degree", "2", "--max-p", "2"],
    ["vanest", "data/pair-groupoid.json", "data/form-pair-x1-x0.json"],
    ["vanest", "data/pair-groupoid.json", "data/form-constant.json"],
    ["vanest", "data/pair-groupoid-R2.json", "data/form-pair-G2.json"],
    ["imcheck", "data/poisson-x.json"], ["imcheck", "data/volume-counterexample.json"],
    ["transgression", "data/transgression-trivial.json"], ["transgression", "data/transgression-exact.json"],
    ["transgression", "data/transgression-perturbed.json"],
    ["library", "so3"],
]


def test_criterion_13_cli_determinism():
    env = dict(os.environ, PYTHONPATH=str(ROOT / "src"))
    differ = []
    for args in CLI_RUNS:
        outs = []
        for hashseed in ("1", "2"):
            env["PYTHONHASHSEED"] = hashseed
            res = subprocess.run([sys.executable, "-m", "weilalg", *args, "--seed", "3"] if args[0] != "library"
                                 else [sys.executable, "-m", "weilalg", *args],
                                 cwd=ROOT, env=env, capture_output=True)
            outs.append((res.returncode, res.stdout))
        if outs[0] != outs[1] or outs[0][0] == 2:
            differ.append(" ".join(args))
    verdict(13, not differ, f"commands={len(CLI_RUNS)} differing={differ}")
