"""Acceptance gate: one test per criterion, each at its stated tolerance.

The oracles here are exact rationals written out independently of the
package; run with ``-s`` to see the per-criterion lines as tests finish, or
read the summary section at the end of the run.
"""
import time
from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from refkato.catalog import load_catalog
from refkato.ellipticity import constants_table
from refkato.fields import kato_ratio, kato_ratios
from refkato.runners import run_fields, run_verify_report
from refkato.suites import (
    cartan_checks,
    complement_checks,
    equivariance_checks,
    hodge_star_checks,
    kahler_configs,
    laplacian_checks,
    linalg_identity_checks,
    no_go_checks,
    orthogonality_checks,
    riemannian_configs,
    section_checks,
    uniqueness_checks,
)


def line(num, ok, detail):
    print(f"\n[acceptance {num}] {'PASS' if ok else 'FAIL'}: {detail}")


def epsilon_oracle(n, k):
    return min(Fraction(1, k + 1), Fraction(1, n - k + 1))


def alpha_oracle(n, k):
    # the two branches, meeting at k = n/2
    if k <= n / 2:
        return sqrt(Fraction(n - k, n - k + 1))
    return sqrt(Fraction(k, k + 1))


def kahler_oracle(n, p, q):
    if p in (0, n) or q in (0, n):
        return Fraction(1, 2)

    def branch(d):
        return max(Fraction(2 * d + 1, 2 * d + 2), Fraction(2 * n - 2 * d + 1, 2 * n - 2 * d + 2))

    return min(branch(p), branch(q))


@pytest.fixture(scope="module")
def catalog():
    return {e.name: e for e in load_catalog()}


@pytest.mark.criterion(1, "Riemannian epsilon and alpha, n <= 10, under 30 s")
def test_criterion_1_riemannian_constants():
    start = time.perf_counter()
    table = constants_table(10)
    elapsed = time.perf_counter() - start
    rows = {(r["n"], r["k"]): r for r in table["riemannian"]}
    eps_err = alpha_err = 0.0
    count = 0
    for n in range(2, 11):
        for k in range(1, n):
            r = rows[(n, k)]
            eps_err = max(eps_err, abs(r["epsilon"] - float(epsilon_oracle(n, k))))
            alpha_err = max(alpha_err, abs(r["alpha"] - alpha_oracle(n, k)))
            count += 1
    ok = eps_err < 1e-10 and alpha_err < 1e-10 and elapsed < 30
    line(1, ok, f"{count} configs, max eps err {eps_err:.1e}, max alpha err {alpha_err:.1e}, {elapsed:.2f} s")
    assert count == 45
    assert eps_err < 1e-10
    assert alpha_err < 1e-10
    assert elapsed < 30


@pytest.mark.criterion(2, "Kahler alpha squared, n <= 6, under 60 s")
def test_criterion_2_kahler_constants():
    start = time.perf_counter()
    table = constants_table(1, complex_n_max=6)
    elapsed = time.perf_counter() - start
    err = 0.0
    seen = set()
    for r in table["kahler"]:
        numeric = min(r["alpha_squared_L1"], r["alpha_squared_L2"])
        err = max(err, abs(numeric - float(kahler_oracle(r["n"], r["p"], r["q"]))))
        seen.add((r["n"], r["p"], r["q"]))
    expected = {(n, p, q) for n in range(1, 7) for p in range(n + 1) for q in range(n + 1)}
    ok = seen == expected and err < 1e-10 and elapsed < 60
    line(2, ok, f"{len(seen)} configs, max err {err:.1e}, {elapsed:.2f} s")
    assert seen == expected
    assert err < 1e-10
    assert elapsed < 60


@pytest.mark.criterion("3a", "quadratic gradients attain sqrt((n-1)/n) within 1e-9")
@pytest.mark.parametrize("n", [3, 4, 5])
def test_criterion_3a_quadratic_attainment(catalog, n):
    e = catalog[f"quad{n}"]
    r = kato_ratio(e.build_field(), e.expected_attainment)
    target = sqrt((n - 1) / n)
    ok = r is not None and abs(r - target) < 1e-9
    line("3a", ok, f"n={n}: ratio {r!r} vs {target!r}")
    assert ok


@pytest.mark.criterion("3b", "holomorphic (p,0)-fields have ratio 1/sqrt(2) within 1e-10 off zeros")
def test_criterion_3b_holomorphic_constant(catalog):
    # monomial entries carry constant=1; sums of monomials only satisfy the bound
    holo = [e for e in catalog.values() if e.family == "holomorphic" and e.constant_ratio]
    worst, total = 0.0, 0
    for e in holo:
        r = kato_ratios(e.build_field(), e.grid())
        d = r[~np.isnan(r)]
        assert len(d) > 0, e.name
        worst = max(worst, float(np.abs(d - 1 / sqrt(2)).max()))
        total += len(d)
    ok = worst < 1e-10 and len(holo) >= 5
    line("3b", ok, f"{len(holo)} fields, {total} points, max deviation {worst:.1e}")
    assert len(holo) >= 5
    assert worst < 1e-10


@pytest.mark.criterion(4, "identity suites and equivariance below 1e-10")
def test_criterion_4_identity_suites():
    real = list(riemannian_configs(6))
    cplx = list(kahler_configs(6))
    groups = {
        "linear algebra identities": linalg_identity_checks(6),
        "hodge star": hodge_star_checks(6),
        "cartan": cartan_checks(6),
        "sections, isometries, kernels": section_checks(real + cplx),
        "complements": complement_checks(real + list(kahler_configs(5))),
        "laplacian split": laplacian_checks(real + cplx),
        "image orthogonality": orthogonality_checks(6),
        "equivariance": equivariance_checks(real + list(kahler_configs(3)), n_elements=100),
    }
    bad = {}
    for name, checks in groups.items():
        assert checks, name
        worst = max(c.residual for c in checks)
        if not all(c.passed for c in checks) or worst >= 1e-10:
            bad[name] = worst
    theta_tags = {c.config.get("operator") for c in groups["sections, isometries, kernels"]}
    n_checks = sum(len(v) for v in groups.values())
    ok = not bad and len(theta_tags) == 6
    line(4, ok, f"{n_checks} checks, intertwiners {sorted(theta_tags)}, failing groups {bad}")
    assert len(theta_tags) == 6, theta_tags
    assert not bad


@pytest.mark.criterion(5, "no-go overlap above 0.1 somewhere, theta1/theta2 overlap below 1e-12 everywhere")
def test_criterion_5_no_go():
    (check,), rows = no_go_checks(6)
    orth = orthogonality_checks(10)
    worst = max(c.value for c in orth)
    ok = check.value > 0.1 and worst < 1e-12
    line(5, ok, f"best del*/dbar overlap {check.value:.3f} at {check.config.get('argmax')}, max theta1/theta2 overlap {worst:.1e} over {len(orth)} configs")
    assert check.value > 0.1
    assert worst < 1e-12


@pytest.mark.criterion(6, "only the canonical moduli pass the coisometry scan, n <= 6")
def test_criterion_6_uniqueness():
    checks = uniqueness_checks(6, size=200, hi=1.5)
    bad = [c.config for c in checks if not c.passed]
    ok = not bad and len(checks) > 0
    line(6, ok, f"{len(checks)} operator scans over 200 candidates, {len(bad)} with a wrong passing set")
    assert checks and not bad


@pytest.mark.criterion(7, "perturbation mode and the control field each fail a check")
def test_criterion_7_negative_controls():
    perturbed = run_verify_report(4, 2, seed=42, perturb=1e-3)
    failing = [c for c in perturbed.checks if not c.passed]
    fields = run_fields()
    control = [c for c in fields.checks if c.config.get("entry") == "control_x1" and not c.passed]
    ok = bool(failing) and bool(control) and perturbed.exit_code == 1 and fields.exit_code == 0
    line(7, ok, f"perturbed: {len(failing)} failing checks; control: failing {[c.name for c in control]}")
    assert failing and perturbed.exit_code == 1
    assert control and all(c.expected_fail for c in control)
    assert fields.exit_code == 0
