"""Simplex solver, validated against brute-force vertex enumeration.

The oracle enumerates candidate optima directly from the KKT structure of
a bounded problem: every basic feasible point is defined by picking n
active constraints (rows at equality or variables at a bound) and solving
the square system. That is exponential but fine at the sizes used here,
and it is a completely independent check on the simplex path.
"""

import itertools

import numpy as np
import pytest

from cachecast.lp import LinearProgram, LpNumericalError, solve

RNG_TRIALS = 120


def brute_force_min(c, E, f, A, b, lo, hi):
    """Minimize over all vertices of the (bounded) feasible polytope."""
    n = len(c)
    rows = []
    rhs = []
    if E.size:
        for i in range(E.shape[0]):
            rows.append((E[i], f[i], "eq"))
    if A.size:
        for i in range(A.shape[0]):
            rows.append((A[i], b[i], "le"))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows.append((e, lo[j], "bound"))
        rows.append((e, hi[j], "bound"))
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        if any(rows[i][2] == "eq" for i in range(len(rows))) and not all(
            i in combo for i, r in enumerate(rows) if r[2] == "eq"
        ):
            continue
        M = np.array([rows[i][0] for i in combo])
        v = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, v)
        if E.size and np.max(np.abs(E @ x - f)) > 1e-7:
            continue
        if A.size and np.max(A @ x - b) > 1e-7:
            continue
        if np.any(x < lo - 1e-7) or np.any(x > hi + 1e-7):
            continue
        val = float(c @ x)
        if best is None or val < best:
            best = val
    return best


def random_bounded_lp(rng, n, me, ma):
    c = rng.normal(size=n)
    E = rng.normal(size=(me, n)) if me else np.zeros((0, n))
    A = rng.normal(size=(ma, n)) if ma else np.zeros((0, n))
    lo = rng.uniform(-3.0, 0.0, size=n)
    hi = lo + rng.uniform(0.5, 4.0, size=n)
    # anchor the right-hand sides at an interior point so the problem
    # is feasible more often than not
    x0 = rng.uniform(lo, hi)
    f = E @ x0 if me else np.zeros(0)
    b = (A @ x0 + rng.uniform(0.0, 2.0, size=ma)) if ma else np.zeros(0)
    return LinearProgram(c=c, E=E, f=f, A=A, b=b, lo=lo, hi=hi)


def test_solver_matches_vertex_enumeration():
    rng = np.random.default_rng(1234)
    solved = 0
    for _ in range(RNG_TRIALS):
        n = int(rng.integers(2, 5))
        me = int(rng.integers(0, min(n, 2) + 1))
        ma = int(rng.integers(0, 4))
        lp = random_bounded_lp(rng, n, me, ma)
        sol = solve(lp)
        oracle = brute_force_min(lp.c, lp.E, lp.f, lp.A, lp.b, lp.lo, lp.hi)
        if oracle is None:
            assert sol.status == "infeasible"
            continue
        assert sol.status == "optimal"
        assert sol.value == pytest.approx(oracle, abs=1e-7)
        # the reported assignment achieves the reported value and is feasible
        x = sol.assignment
        assert lp.c @ x == pytest.approx(sol.value, abs=1e-8)
        if lp.E.size:
            assert np.max(np.abs(lp.E @ x - lp.f)) < 1e-7
        if lp.A.size:
            assert np.max(lp.A @ x - lp.b) < 1e-7
        assert np.all(x >= lp.lo - 1e-9) and np.all(x <= lp.hi + 1e-9)
        solved += 1
    assert solved > RNG_TRIALS // 2  # most random instances are feasible


def test_infeasible_detected():
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        E=np.array([[1.0, 1.0]]),
        f=np.array([5.0]),
        A=np.zeros((0, 2)),
        b=np.zeros(0),
        lo=np.zeros(2),
        hi=np.ones(2),
    )
    assert solve(lp).status == "infeasible"


def test_unbounded_detected():
    lp = LinearProgram(
        c=np.array([-1.0, 0.0]),
        E=np.zeros((0, 2)),
        f=np.zeros(0),
        A=np.array([[-1.0, 1.0]]),
        b=np.array([1.0]),
        lo=np.array([0.0, 0.0]),
        hi=np.array([np.inf, np.inf]),
    )
    assert solve(lp).status == "unbounded"


def test_pure_box_problem():
    # no rows at all: the solution snaps each variable to the cheap bound
    lp = LinearProgram(
        c=np.array([2.0, -3.0, 0.0]),
        E=np.zeros((0, 3)),
        f=np.zeros(0),
        A=np.zeros((0, 3)),
        b=np.zeros(0),
        lo=np.array([-1.0, -2.0, 0.5]),
        hi=np.array([4.0, 5.0, 2.0]),
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.assignment == pytest.approx([-1.0, 5.0, 0.5])
    assert sol.value == pytest.approx(-17.0)


def test_equality_only_square_system():
    lp = LinearProgram(
        c=np.array([1.0, 2.0]),
        E=np.array([[1.0, 0.0], [0.0, 1.0]]),
        f=np.array([0.25, 0.75]),
        A=np.zeros((0, 2)),
        b=np.zeros(0),
        lo=np.zeros(2),
        hi=np.ones(2),
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.assignment == pytest.approx([0.25, 0.75])


def test_degenerate_problem_terminates():
    # many redundant constraints through the same vertex; Bland's rule
    # must prevent cycling
    n = 6
    E = np.zeros((0, n))
    A = -np.eye(n)
    extra = -np.ones((3, n))
    lp = LinearProgram(
        c=np.ones(n),
        E=E,
        f=np.zeros(0),
        A=np.vstack([A, extra]),
        b=np.zeros(n + 3),
        lo=np.zeros(n),
        hi=np.full(n, 10.0),
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(0.0, abs=1e-9)


def test_negative_rhs_rows():
    # rows that need a sign flip for the artificial start
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        E=np.array([[-1.0, -1.0]]),
        f=np.array([-1.0]),
        A=np.zeros((0, 2)),
        b=np.zeros(0),
        lo=np.zeros(2),
        hi=np.full(2, 5.0),
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0)


def test_shape_validation():
    with pytest.raises(ValueError):
        LinearProgram(
            c=np.ones(2),
            E=np.ones((1, 3)),
            f=np.ones(1),
            A=np.zeros((0, 2)),
            b=np.zeros(0),
            lo=np.zeros(2),
            hi=np.ones(2),
        )
    with pytest.raises(ValueError):
        LinearProgram(
            c=np.ones(2),
            E=np.zeros((0, 2)),
            f=np.zeros(0),
            A=np.zeros((0, 2)),
            b=np.zeros(0),
            lo=np.ones(2),
            hi=np.zeros(2),  # lo > hi
        )
