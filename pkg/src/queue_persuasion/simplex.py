"""Dense two-phase tableau simplex.

Solves ``max c.z  s.t.  A_eq z = b_eq,  A_ub z <= b_ub`` with each ``z_j``
either nonnegative or free.  Free columns are split into a difference of two
nonnegative columns internally.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class SimplexError(RuntimeError):
    pass


class IterationLimitError(SimplexError):
    def __init__(self, message, basis=None, iterations=None):
        super().__init__(message)
        self.basis = basis
        self.iterations = iterations


class SingularBasisError(SimplexError):
    pass


def _frozen(a, shape=None) -> np.ndarray:
    a = np.array(a, dtype=float)
    if shape is not None:
        a = a.reshape(shape)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LpProblem:
    """Dense LP in maximization form.  Arrays are copied and made read-only."""

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    names: tuple = ()
    nonneg: np.ndarray | None = None
    eq_labels: tuple = ()
    ub_labels: tuple = ()

    def __post_init__(self):
        c = _frozen(self.c).ravel()
        n = c.size
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("c", c)
        for A, b in (("A_eq", "b_eq"), ("A_ub", "b_ub")):
            Am, bv = getattr(self, A), getattr(self, b)
            if Am is None or np.size(Am) == 0:
                Am, bv = np.zeros((0, n)), np.zeros(0)
            Am = _frozen(Am)
            Am = Am.reshape(-1, n)
            bv = _frozen(bv).ravel()
            if Am.shape[0] != bv.size:
                raise ValueError(f"{A} has {Am.shape[0]} rows but {b} has {bv.size}")
            set_(A, Am)
            set_(b, bv)
        nonneg = np.ones(n, bool) if self.nonneg is None else np.array(self.nonneg, bool)
        nonneg.setflags(write=False)
        set_("nonneg", nonneg)
        names = tuple(self.names) or tuple(f"z{j}" for j in range(n))
        if len(names) != n or len(set(names)) != n:
            raise ValueError("variable names must be unique and one per column")
        set_("names", names)
        set_("eq_labels", tuple(self.eq_labels) or tuple(f"eq{k}" for k in range(self.n_eq)))
        set_("ub_labels", tuple(self.ub_labels) or tuple(f"ub{k}" for k in range(self.n_ub)))
        for arr in (c, self.A_eq, self.b_eq, self.A_ub, self.b_ub):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP coefficients must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def n_ub(self) -> int:
        return self.A_ub.shape[0]

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass
class SolverOptions:
    pivot_tol: float = 1e-9
    bland_after: int = 2000
    max_iters: int = 100_000
    opt_tol: float = 1e-9
    feas_tol: float = 1e-9
    refactor_every: int = 100


@dataclass
class LpSolution:
    status: str
    values: np.ndarray | None
    objective: float
    iterations: int
    max_residual: float = np.nan
    basis: tuple = ()
    objective_trace: list = field(default_factory=list)
    pivots: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class ResidualReport:
    eq_residual: float
    ineq_violation: float
    negativity: float
    worst_eq: str | None = None
    worst_ub: str | None = None

    @property
    def max_residual(self) -> float:
        return max(self.eq_residual, self.ineq_violation, self.negativity)

    def ok(self, tol: float = 1e-8) -> bool:
        return self.max_residual <= tol


def check_solution(problem: LpProblem, solution, tol: float = 1e-8) -> ResidualReport:
    """Constraint residuals of a candidate point, computed from the raw problem."""
    z = np.asarray(getattr(solution, "values", solution), dtype=float)
    eq = np.abs(problem.A_eq @ z - problem.b_eq) if problem.n_eq else np.zeros(0)
    ub = np.maximum(problem.A_ub @ z - problem.b_ub, 0.0) if problem.n_ub else np.zeros(0)
    neg = np.maximum(-z[problem.nonneg], 0.0)
    return ResidualReport(
        eq_residual=float(eq.max(initial=0.0)),
        ineq_violation=float(ub.max(initial=0.0)),
        negativity=float(neg.max(initial=0.0)),
        worst_eq=problem.eq_labels[int(eq.argmax())] if eq.size and eq.max() > tol else None,
        worst_ub=problem.ub_labels[int(ub.argmax())] if ub.size and ub.max() > tol else None,
    )


class _Tableau:
    """Working tableau ``[B^-1 A | B^-1 b]`` plus a reduced-cost row."""

    def __init__(self, A, b, c, basis, opts: SolverOptions):
        self.A = A            # original standard-form rows (kept for refactoring)
        self.b = b
        self.c = c
        self.basis = list(basis)
        self.opts = opts
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.refactor()

    @property
    def m(self):
        return self.A.shape[0]

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            cond = np.linalg.cond(B) if B.size else 1.0
            if not np.isfinite(cond) or cond > 1e14:
                raise np.linalg.LinAlgError(f"condition number {cond:.3g}")
            body = np.linalg.solve(B, np.column_stack([self.A, self.b])) if B.size else \
                np.column_stack([self.A, self.b])
        except np.linalg.LinAlgError as exc:
            raise SingularBasisError(f"basis is numerically singular: {exc}") from None
        m = self.m
        self.T[:m] = body
        rhs = self.T[:m, -1]
        rhs[(rhs < 0) & (rhs > -self.opts.feas_tol)] = 0.0
        cb = self.c[self.basis]
        self.T[m, :-1] = cb @ self.T[:m, :-1] - self.c
        self.T[m, -1] = cb @ rhs
        # basic columns are unit vectors by definition
        self.T[m, self.basis] = 0.0

    def set_cost(self, c):
        self.c = c
        self.refactor()

    @property
    def objective(self) -> float:
        return float(self.T[self.m, -1])

    def pivot(self, r: int, j: int):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        rows = np.flatnonzero(col)
        if rows.size:
            T[rows] -= np.outer(col[rows], T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def drop_row(self, r: int, k: int):
        """Remove tableau row ``r`` together with original constraint ``k``."""
        keep = np.ones(self.m + 1, bool)
        keep[r] = False
        self.T = self.T[keep]
        self.A = np.delete(self.A, k, axis=0)
        self.b = np.delete(self.b, k)
        del self.basis[r]

    def entering(self, allowed, bland: bool):
        d = self.T[self.m, :-1]
        cand = np.flatnonzero((d < -self.opts.opt_tol) & allowed)
        if cand.size == 0:
            return None
        if bland:
            return int(cand[0])
        return int(cand[np.argmin(d[cand])])

    def leaving(self, j: int, bland: bool):
        m = self.m
        col = self.T[:m, j]
        rows = np.flatnonzero(col > self.opts.pivot_tol)
        if rows.size == 0:
            return None
        rhs = np.maximum(self.T[rows, -1], 0.0)
        if bland:
            ratios = rhs / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            basis = np.asarray(self.basis)
            return int(ties[np.argmin(basis[ties])])
        # Harris two-pass test: relax the step by feas_tol, then take the
        # largest pivot among rows that block within the relaxed step
        relaxed = ((rhs + self.opts.feas_tol) / col[rows]).min()
        ok = rows[rhs / col[rows] <= relaxed]
        return int(ok[np.argmax(col[ok])])

    def run(self, allowed, state, phase: int):
        """Pivot until optimal or unbounded.  ``state`` carries the global count."""
        opts = self.opts
        since_refactor = 0
        while True:
            bland = state["iters"] >= opts.bland_after
            j = self.entering(allowed, bland)
            if j is None:
                return OPTIMAL
            r = self.leaving(j, bland)
            if r is None:
                return UNBOUNDED
            if state["iters"] >= opts.max_iters:
                raise IterationLimitError(
                    f"simplex exceeded {opts.max_iters} iterations in phase {phase}",
                    basis=tuple(self.basis), iterations=state["iters"])
            state["pivots"].append((phase, r, j))
            self.pivot(r, j)
            state["iters"] += 1
            since_refactor += 1
            if since_refactor >= opts.refactor_every:
                self.refactor()
                since_refactor = 0
            if phase == 2:
                state["trace"].append(self.objective)


def _standard_form(problem: LpProblem):
    """Rows ``[eq; ub]`` with slacks, free columns split, rhs made nonnegative."""
    free = np.flatnonzero(~problem.nonneg)
    A_rows = np.vstack([problem.A_eq, problem.A_ub])
    A_struct = np.hstack([A_rows, -A_rows[:, free]])
    c = np.concatenate([problem.c, -problem.c[free]])
    m_eq, m_ub = problem.n_eq, problem.n_ub
    slack = np.vstack([np.zeros((m_eq, m_ub)), np.eye(m_ub)])
    A = np.hstack([A_struct, slack])
    b = np.concatenate([problem.b_eq, problem.b_ub])
    c = np.concatenate([c, np.zeros(m_ub)])
    flip = b < 0
    A[flip] *= -1
    b = np.where(flip, -b, b)
    n_struct = A_struct.shape[1]
    slack_ok = np.zeros(m_eq + m_ub, bool)
    slack_ok[m_eq:] = ~flip[m_eq:]
    return A, b, c, free, n_struct, slack_ok


def solve(problem: LpProblem, options: SolverOptions | None = None, **kw) -> LpSolution:
    """Two-phase simplex with Dantzig pricing, falling back to Bland's rule.

    Keyword arguments override fields of ``options``.
    """
    opts = SolverOptions(**{**(vars(options) if options else {}), **kw})
    A, b, c, free, n_struct, slack_ok = _standard_form(problem)
    m, n = A.shape
    n_orig = problem.n_vars

    # phase I: artificials on every row whose slack cannot start basic
    art_rows = np.flatnonzero(~slack_ok)
    n_art = art_rows.size
    A1 = np.hstack([A, np.zeros((m, n_art))])
    A1[art_rows, n + np.arange(n_art)] = 1.0
    basis = np.empty(m, int)
    basis[art_rows] = n + np.arange(n_art)
    ok_rows = np.flatnonzero(slack_ok)
    basis[ok_rows] = n_struct + (ok_rows - problem.n_eq)
    c1 = np.zeros(n + n_art)
    c1[n:] = -1.0

    state = {"iters": 0, "trace": [], "pivots": []}
    tab = _Tableau(A1, b, c1, basis, opts)
    is_art = np.zeros(n + n_art, bool)
    is_art[n:] = True
    if n_art:
        tab.run(np.ones(n + n_art, bool), state, phase=1)
        tab.refactor()
        infeas = -tab.objective
        if infeas > 100 * opts.feas_tol * max(1.0, np.abs(b).max(initial=0.0)):
            log.debug("phase I ended with infeasibility %.3g", infeas)
            return LpSolution(INFEASIBLE, None, np.nan, state["iters"],
                              pivots=state["pivots"])
        _expel_artificials(tab, is_art, art_rows, n, opts)

    # phase II on the non-artificial columns
    keep = ~is_art
    tab.A = tab.A[:, keep]
    cols = np.flatnonzero(keep)
    remap = {old: new for new, old in enumerate(cols)}
    tab.basis = [remap[j] for j in tab.basis]
    tab.T = np.column_stack([tab.T[:, :-1][:, keep], tab.T[:, -1]])
    tab.set_cost(c)
    status = tab.run(np.ones(n, bool), state, phase=2)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, None, np.inf, state["iters"],
                          basis=tuple(tab.basis), objective_trace=state["trace"],
                          pivots=state["pivots"])
    tab.refactor()
    z = np.zeros(n)
    z[tab.basis] = tab.T[: tab.m, -1]
    z = np.where(np.abs(z) < 1e-15, 0.0, z)
    x = z[:n_orig].copy()
    x[free] -= z[n_orig:n_struct]
    report = check_solution(problem, x)
    return LpSolution(
        status=OPTIMAL,
        values=x,
        objective=float(problem.c @ x),
        iterations=state["iters"],
        max_residual=report.max_residual,
        basis=tuple(tab.basis),
        objective_trace=state["trace"],
        pivots=state["pivots"],
    )


def _expel_artificials(tab: _Tableau, is_art, art_rows, n: int, opts: SolverOptions):
    """Pivot zero-level artificials out of the basis; drop redundant rows.

    A tableau row with no usable pivot certifies that the original row owning
    the basic artificial is a combination of the others.
    """
    origin = list(range(tab.m))  # original row index of each current A row
    r = 0
    while r < tab.m:
        if not is_art[tab.basis[r]]:
            r += 1
            continue
        row = tab.T[r, :-1]
        cand = np.flatnonzero((np.abs(row) > opts.pivot_tol) & ~is_art)
        if cand.size:
            tab.pivot(r, int(cand[np.argmax(np.abs(row[cand]))]))
            r += 1
        else:
            k = origin.index(int(art_rows[tab.basis[r] - n]))
            tab.drop_row(r, k)
            del origin[k]
    tab.refactor()


# ---------------------------------------------------------------------------
# plain-text dense tableau format

_MAGIC = "LPTABLEAU 1"


def dumps_tableau(problem: LpProblem) -> str:
    """Serialize as a header with dimensions followed by one line per row."""
    fmt = lambda arr: " ".join(repr(float(v)) for v in arr)
    lines = [
        _MAGIC,
        f"dims {problem.n_vars} {problem.n_eq} {problem.n_ub}",
        "names " + " ".join(problem.names),
        "nonneg " + " ".join("1" if f else "0" for f in problem.nonneg),
        "obj " + fmt(problem.c),
    ]
    for label, row, rhs in zip(problem.eq_labels, problem.A_eq, problem.b_eq):
        lines.append(f"E {label} {fmt(row)} | {float(rhs)!r}")
    for label, row, rhs in zip(problem.ub_labels, problem.A_ub, problem.b_ub):
        lines.append(f"U {label} {fmt(row)} | {float(rhs)!r}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads_tableau(text: str) -> LpProblem:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _MAGIC:
        raise ValueError("not a dense tableau document")
    n, m_eq, m_ub = (int(t) for t in lines[1].split()[1:4])
    names = tuple(lines[2].split()[1:])
    nonneg = np.array([t == "1" for t in lines[3].split()[1:]])
    c = np.array(lines[4].split()[1:], dtype=float)
    rows = {"E": ([], [], []), "U": ([], [], [])}
    for ln in lines[5:]:
        if ln.strip() == "end":
            break
        head, rhs = ln.split("|")
        kind, label, *vals = head.split()
        rows[kind][0].append(label)
        rows[kind][1].append(np.array(vals, dtype=float))
        rows[kind][2].append(float(rhs))
    eq_l, A_eq, b_eq = rows["E"]
    ub_l, A_ub, b_ub = rows["U"]
    if len(A_eq) != m_eq or len(A_ub) != m_ub or c.size != n:
        raise ValueError("tableau body does not match its header dimensions")
    return LpProblem(
        c=c,
        A_eq=np.array(A_eq).reshape(m_eq, n),
        b_eq=np.array(b_eq),
        A_ub=np.array(A_ub).reshape(m_ub, n),
        b_ub=np.array(b_ub),
        names=names,
        nonneg=nonneg,
        eq_labels=tuple(eq_l),
        ub_labels=tuple(ub_l),
    )
