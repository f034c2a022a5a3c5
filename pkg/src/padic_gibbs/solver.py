"""Certified root finding in p-adic balls.

``hensel_lift`` is univariate Newton lifting from an anchor.  ``digit_solve``
enumerates residue classes of a 1- or 2-variable integral system digit by digit:

* the system is rescaled to the ball, ``u = c + p**r x``, and each equation is
  divided by its content so the survival test is not trivially passed;
* a class survives to the next digit iff every equation vanishes there mod
  ``p**k`` (the hot loop lives in :mod:`padic_gibbs.kernels`);
* a class is dropped early when one equation's Taylor expansion shows it has
  constant nonzero valuation on the class;
* when the multivariate Hensel condition ``|G(a)| < |det J(a)|**2`` holds at a
  representative, the root is lifted by Newton's method and every class inside
  its uniqueness disc ``|x - root| < |det J|`` is settled at once;
* classes still open at full depth are reported as clusters.

All phases of one level run over the whole level before the next phase, so the
result does not depend on the processing order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

from . import kernels
from .padic import PadicNumber, PrecisionError, _from_int_mod, valuation_of_int
from .poly import PadicMPoly, PadicPoly

__all__ = [
    "BallSpec",
    "SolutionCertificate",
    "HenselError",
    "SolverInconclusive",
    "ConvergenceError",
    "hensel_lift",
    "digit_solve",
    "fixed_point",
    "ContractionResult",
    "contraction_ratio",
    "residual_valuations",
]

DEFAULT_NODE_BUDGET = 10**6


class HenselError(ValueError):
    """The lifting inequality fails at the anchor."""

    def __init__(self, message: str, value_norm: Fraction, derivative_norm: Fraction):
        super().__init__(message)
        self.value_norm = value_norm
        self.derivative_norm = derivative_norm


class SolverInconclusive(RuntimeError):
    """Enumeration stopped at the node budget; carries partial statistics."""

    def __init__(self, message: str, nodes: int, level: int, open_classes: int):
        super().__init__(message)
        self.nodes = nodes
        self.level = level
        self.open_classes = open_classes


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, ratios: list[Fraction]):
        super().__init__(message)
        self.ratios = ratios


@dataclass(frozen=True)
class BallSpec:
    """``center + p**radius * Z_p^n``."""

    center: tuple[PadicNumber, ...]
    radius: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(self.center))
        if not self.center:
            raise ValueError("empty ball center")
        if len({c.prime for c in self.center}) != 1:
            raise ValueError("center coordinates must share a prime")

    @property
    def prime(self) -> int:
        return self.center[0].prime

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, point: Sequence[PadicNumber]) -> bool:
        """Membership; raises :class:`PrecisionError` when undecidable."""
        for c, x in zip(self.center, point, strict=True):
            d = x - c
            if d.is_zero():
                if d.valuation < self.radius:
                    raise PrecisionError("point too imprecise to test ball membership")
            elif d.valuation < self.radius:
                return False
        return True

    def to_json(self) -> dict:
        return {"center": [c.to_json() for c in self.center], "radius": self.radius}


@dataclass(frozen=True)
class SolutionCertificate:
    """One root or root class.

    ``residuals`` holds, per equation, ``v`` with ``|F_i(point)| <= p**-v``:
    the exact valuation when the residual is nonzero, else its precision floor.
    ``witness`` is ``hensel`` (lifted root, ``lift_history`` lists certified
    digits per Newton step), ``exhaustive`` (a class that survived enumeration
    to full depth, i.e. a cluster) or ``contraction`` (fixed-point iteration).
    """

    point: tuple[PadicNumber, ...]
    certified_digits: int
    residuals: tuple[int, ...]
    witness: str
    lift_history: tuple[int, ...] = ()
    cluster: bool = False
    roots_in_class: int = 1
    oracle_check: bool | None = None
    notes: tuple[str, ...] = ()
    detail: dict = field(default_factory=dict, compare=False)

    def with_oracle(self, passed: bool) -> SolutionCertificate:
        return _replace(self, oracle_check=passed)

    def to_json(self) -> dict:
        out = {
            "point": [x.to_json() for x in self.point],
            "certified_digits": self.certified_digits,
            "residuals": [{"norm_exp": -v} for v in self.residuals],
            "witness": self.witness,
            "lift_history": list(self.lift_history),
            "cluster": self.cluster,
            "roots_in_class": self.roots_in_class,
            "oracle_check": self.oracle_check,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.detail:
            out["detail"] = self.detail
        return out


def _replace(cert: SolutionCertificate, **changes) -> SolutionCertificate:
    from dataclasses import replace

    return replace(cert, **changes)


def _residual_valuation(r: PadicNumber) -> int:
    return r.valuation


def residual_valuations(system: Sequence, point: Sequence[PadicNumber]) -> tuple[int, ...]:
    """Per-equation residual valuation bounds at ``point``; re-evaluation of a
    certificate must reproduce its ``residuals`` exactly."""
    out = []
    for eq in system:
        r = eq(point[0]) if isinstance(eq, PadicPoly) else eq(tuple(point))
        out.append(_residual_valuation(r))
    return tuple(out)


# -- univariate Hensel -------------------------------------------------------


def hensel_lift(P: PadicPoly, anchor: PadicNumber, target_digits: int, max_steps: int = 64) -> SolutionCertificate:
    """Newton-lift ``anchor`` to a root of ``P`` certified to ``target_digits``
    absolute digits.

    Requires ``|P(anchor)| < |P'(anchor)|**2``; otherwise raises
    :class:`HenselError` with both norms.
    """
    dP = P.derivative()
    fa, da = P(anchor), dP(anchor)
    if da.is_zero() or not (fa.is_zero() or fa.valuation > 2 * da.valuation):
        raise HenselError(
            f"lifting inequality fails: |P(a)| = {fa.norm}, |P'(a)| = {da.norm}",
            fa.norm,
            da.norm,
        )
    x = anchor
    history = []
    f, d = fa, da
    for _ in range(max_steps):
        digits = f.valuation - d.valuation
        history.append(digits)
        if digits >= target_digits or f.is_zero():
            break
        x = x - f / d
        f, d = P(x), dP(x)
    certified = history[-1]
    if certified < target_digits:
        raise PrecisionError(f"only {certified} digits certifiable at working precision, {target_digits} requested")
    x = x.with_absolute_precision(max(certified, x.valuation + 1)) if not x.is_zero() else x
    return SolutionCertificate(
        point=(x,),
        certified_digits=target_digits,
        residuals=residual_valuations([P], (x,)),
        witness="hensel",
        lift_history=tuple(history),
    )


# -- enumeration -------------------------------------------------------------


class _IntSystem:
    """Integer image of a system after the ball change of variables and content
    removal; all arithmetic is mod ``p**digits``."""

    def __init__(self, polys: list[PadicMPoly], ball: BallSpec):
        p = ball.prime
        n = ball.dimension
        self.p, self.n = p, n
        absprec = min(eq.min_coefficient_absprec() for eq in polys)
        for c in ball.center:
            if not c.is_zero() and c.valuation < 0:
                raise ValueError("ball center must be integral")
        self.source_digits = absprec
        mod = p**absprec
        centers = [0 if c.is_zero() else c.residue(absprec) for c in ball.center]
        scale = p**ball.radius
        self.centers = centers
        self.radius = ball.radius
        self.contents = []
        self.equations = []
        for eq in polys:
            shifted: dict[tuple[int, ...], int] = {}
            for e, c in eq.integer_terms(absprec):
                _expand_term(shifted, e, c, centers, scale, mod)
            shifted = {e: c % mod for e, c in shifted.items() if c % mod}
            content = min((valuation_of_int(c, p) for c in shifted.values()), default=absprec)
            self.contents.append(content)
            div = p**content
            self.equations.append({e: c // div for e, c in shifted.items()})
        self.digits = absprec - max(self.contents)
        self.mod = p**self.digits if self.digits > 0 else 1
        self.equations = [{e: c % self.mod for e, c in eq.items() if c % self.mod} for eq in self.equations]
        self.term_lists = [sorted(eq.items()) for eq in self.equations]
        self.partials = [[_partial(eq, i, self.mod) for i in range(n)] for eq in self.equations]

    def eval(self, eq: dict, x: Sequence[int], mod: int | None = None) -> int:
        mod = mod or self.mod
        acc = 0
        for e, c in eq.items():
            t = c
            for xi, k in zip(x, e):
                if k:
                    t = t * pow(xi, k, mod) % mod
            acc += t
        return acc % mod

    def values(self, x: Sequence[int]) -> list[int]:
        return [self.eval(eq, x) for eq in self.equations]

    def jacobian(self, x: Sequence[int]) -> list[list[int]]:
        return [[self.eval(d, x) for d in row] for row in self.partials]

    def det(self, jac: list[list[int]]) -> int:
        if self.n == 1:
            return jac[0][0] % self.mod
        return (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) % self.mod

    def val(self, v: int) -> int:
        """Valuation of a residue mod ``p**digits`` (``digits`` when zero)."""
        return valuation_of_int(v, self.p) if v % self.mod else self.digits

    def taylor_bound(self, eq: dict, a: Sequence[int], k: int) -> int:
        """Lower bound for ``nu(G(a + p**k t) - G(a))`` over integral ``t``."""
        best = self.digits
        for beta in _multi_indices(eq, self.n):
            if not any(beta):
                continue
            c = 0
            for e, coeff in eq.items():
                if all(ei >= bi for ei, bi in zip(e, beta)):
                    t = coeff
                    for ai, ei, bi in zip(a, e, beta):
                        t = t * comb(ei, bi) * pow(ai, ei - bi, self.mod) % self.mod
                    c += t
            c %= self.mod
            if c:
                best = min(best, valuation_of_int(c, self.p) + k * sum(beta))
        return best

    def newton(self, a: Sequence[int], vdet: int) -> tuple[tuple[int, ...], list[int], int]:
        """Lift ``a`` towards a root; returns the best point, the valuation of
        ``G`` after each step and the number of digits of the root it fixes."""
        x = list(a)
        p, mod = self.p, self.mod
        history: list[int] = []
        best = tuple(x)
        inv_mod = p ** max(self.digits - vdet, 1)
        for _ in range(64):
            vg = min(self.val(v) for v in self.values(x))
            if history and vg <= history[-1]:
                break  # precision floor reached
            history.append(vg)
            best = tuple(x)
            if vg >= self.digits:
                break
            g = self.values(x)
            jac = self.jacobian(x)
            unit_inv = pow(self.det(jac) // p**vdet, -1, inv_mod)
            if self.n == 1:
                step = [g[0]]
            else:
                step = [
                    (jac[1][1] * g[0] - jac[0][1] * g[1]) % mod,
                    (-jac[1][0] * g[0] + jac[0][0] * g[1]) % mod,
                ]
            x = [(x[i] - (step[i] // p**vdet) * unit_inv) % mod for i in range(self.n)]
        return best, history, history[-1] - vdet


def _expand_term(out: dict, e: tuple[int, ...], c: int, centers, scale: int, mod: int):
    """Add ``c * prod (center_i + scale * x_i)**e_i`` to ``out``."""
    parts = [{(0,) * len(e): c}]
    for i, k in enumerate(e):
        nxt: dict = {}
        for j in range(k + 1):
            coef = comb(k, j) * pow(centers[i], k - j, mod) * pow(scale, j, mod) % mod
            if not coef:
                continue
            for f, v in parts[-1].items():
                g = list(f)
                g[i] += j
                g = tuple(g)
                nxt[g] = (nxt.get(g, 0) + v * coef) % mod
        parts.append(nxt)
    for f, v in parts[-1].items():
        out[f] = out.get(f, 0) + v


def _partial(eq: dict, i: int, mod: int) -> dict:
    out = {}
    for e, c in eq.items():
        if e[i]:
            f = list(e)
            f[i] -= 1
            v = c * e[i] % mod
            if v:
                out[tuple(f)] = (out.get(tuple(f), 0) + v) % mod
    return out


def _multi_indices(eq: dict, n: int):
    degs = [max((e[i] for e in eq), default=0) for i in range(n)]
    if n == 1:
        return [(b,) for b in range(degs[0] + 1)]
    return [(b1, b2) for b1 in range(degs[0] + 1) for b2 in range(degs[1] + 1)]


@dataclass
class _Root:
    x: tuple[int, ...]
    digits: int  # x is determined mod p**digits
    vdet: int
    history: list[int]


def _as_mpolys(system) -> list[PadicMPoly]:
    out = []
    for eq in system:
        out.append(eq.to_mpoly() if isinstance(eq, PadicPoly) else eq)
    nv = {eq.nvars for eq in out}
    if len(nv) != 1:
        raise ValueError("equations must share their variables")
    return out


def digit_solve(
    system: Sequence,
    ball: BallSpec,
    target_digits: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    order_seed: int | None = None,
    exact_roots: Sequence[Sequence[PadicNumber]] = (),
) -> list[SolutionCertificate]:
    """All roots of ``system`` in ``ball``, one certificate per residue class
    mod ``p**target_digits``, in canonical digit order.

    ``exact_roots`` are points the caller knows to be exact roots of the
    underlying (infinitely precise) system, e.g. a structural fixed point; they
    seed uniqueness discs even when working precision alone could not certify
    them.  ``order_seed`` shuffles the internal processing order; the output
    must not change.  Raises :class:`SolverInconclusive` past ``node_budget``
    classes.
    """
    polys = _as_mpolys(system)
    n = polys[0].nvars
    if n not in (1, 2) or ball.dimension != n:
        raise ValueError("digit_solve handles 1 or 2 variables with a matching ball")
    if not polys:
        raise ValueError("empty system")
    p = ball.prime
    S = _IntSystem(polys, ball)
    depth_goal = target_digits - ball.radius
    if depth_goal < 0:
        raise ValueError("target_digits is below the ball radius")
    if S.digits < depth_goal:
        raise PrecisionError(
            f"coefficients carry {S.source_digits} digits (content {max(S.contents)}), "
            f"not enough for {target_digits} digits in the ball"
        )
    rng = random.Random(order_seed) if order_seed is not None else None
    term_lists = S.term_lists
    roots: dict[tuple[int, ...], _Root] = {}
    for point in exact_roots:
        root = _exact_root(S, ball, point)
        if root is not None:
            roots[root.x] = root
    level_classes: list[tuple[int, ...]] = [(0,) * n]
    nodes = 1
    k = 0
    while level_classes:
        if rng is not None:
            level_classes = list(level_classes)
            rng.shuffle(level_classes)
        # phase 1: Hensel discovery at every representative of this level
        candidates = []
        for a in level_classes:
            if any(_in_disc(a, r, p) for r in roots.values()):
                continue
            det = S.det(S.jacobian(a))
            if det == 0:
                continue
            vdet = S.val(det)
            vg = min(S.val(v) for v in S.values(a))
            if vg > 2 * vdet:
                x, hist, digits = S.newton(a, vdet)
                candidates.append(_Root(tuple(xi % p**digits for xi in x), digits, vdet, hist))
        for cand in sorted(candidates, key=lambda r: (-r.digits, r.x)):
            if not any(_in_disc(cand.x, r, p) for r in roots.values()):
                roots[cand.x] = cand
        # phase 2: settle classes inside uniqueness discs, drop provably empty ones
        still_open = []
        for a in level_classes:
            settled = False
            for r in roots.values():
                radius = r.vdet + 1
                if k >= radius and all((ai - ri) % p**radius == 0 for ai, ri in zip(a, r.x)):
                    # inside the disc: the class either holds the root or is empty
                    settled = True
                    break
            if settled:
                continue
            if k and _excluded(S, a, k):
                continue
            still_open.append(a)
        if k >= S.digits or not still_open:
            level_classes = still_open
            break
        still_open.sort()
        children = kernels.surviving_children(term_lists, n, p, k + 1, still_open)
        if k >= depth_goal and len(children) > len(still_open):
            # past the target a growing level means a non-isolated cluster;
            # refining it further only multiplies classes
            level_classes = still_open
            break
        k += 1
        level_classes = children
        nodes += len(level_classes)
        if nodes > node_budget:
            raise SolverInconclusive(
                f"node budget {node_budget} exhausted at depth {k}", nodes, k, len(level_classes)
            )
    clusters = level_classes
    return _assemble(polys, ball, S, roots, clusters, k, target_digits, depth_goal)


def _in_disc(a: Sequence[int], root: _Root, p: int) -> bool:
    """``a`` lies in the uniqueness disc of ``root``."""
    m = p ** (root.vdet + 1)
    return all((ai - ri) % m == 0 for ai, ri in zip(a, root.x))


def _exact_root(S: _IntSystem, ball: BallSpec, point: Sequence[PadicNumber]) -> _Root | None:
    p = S.p
    if not ball.contains(point):
        raise ValueError("declared exact root lies outside the ball")
    x = []
    for c, u in zip(ball.center, point):
        d = u - c
        x.append(0 if d.is_zero() else (d / p**ball.radius).residue(S.digits))
    x = tuple(x)
    if any(v % S.mod for v in S.values(x)):
        raise ValueError("declared exact root does not satisfy the system at working precision")
    det = S.det(S.jacobian(x))
    if det == 0:
        return None
    return _Root(x, S.digits, S.val(det), [S.digits])


def _excluded(S: _IntSystem, a: tuple[int, ...], k: int) -> bool:
    """Some equation has constant nonzero valuation on ``a + p**k Z^n``."""
    for eq in S.equations:
        v0 = S.val(S.eval(eq, a))
        if v0 < S.digits and v0 < S.taylor_bound(eq, a, k):
            return True
    return False


def _digit_key(values: Sequence[int], p: int, digits: int) -> tuple:
    out = []
    for v in values:
        ds = []
        for _ in range(digits):
            v, d = divmod(v, p)
            ds.append(d)
        out.append(tuple(ds))
    return tuple(out)


def _assemble(polys, ball, S, roots, clusters, depth, target_digits, depth_goal) -> list[SolutionCertificate]:
    p, r = ball.prime, ball.radius
    scale = p**r
    tmod = p**target_digits
    groups: dict[tuple[int, ...], dict] = {}
    for root in roots.values():
        u = tuple((c + scale * xi) for c, xi in zip(S.centers, root.x))
        key = tuple(v % tmod for v in u)
        groups.setdefault(key, {"roots": [], "clusters": []})["roots"].append((root, u))
    for a in clusters:
        u = tuple((c + scale * xi) for c, xi in zip(S.centers, a))
        key = tuple(v % tmod for v in u)
        groups.setdefault(key, {"roots": [], "clusters": []})["clusters"].append((a, u))
    certs = []
    for key in sorted(groups, key=lambda kk: _digit_key(kk, p, target_digits)):
        g = groups[key]
        notes = []
        if g["roots"]:
            g["roots"].sort(key=lambda t: _digit_key(t[1], p, r + t[0].digits))
            root, u = g["roots"][0]
            absprec = r + root.digits
            point = tuple(_from_int_mod(p, v, absprec) for v in u)
            if len(g["roots"]) > 1:
                notes.append(f"{len(g['roots'])} distinct roots share this class")
            if g["clusters"]:
                notes.append("class also holds unresolved sub-classes")
            certs.append(
                SolutionCertificate(
                    point=point,
                    certified_digits=min(target_digits, absprec),
                    residuals=residual_valuations(polys, point),
                    witness="hensel",
                    lift_history=tuple(root.history),
                    roots_in_class=len(g["roots"]),
                    notes=tuple(notes),
                    detail={"jacobian_valuation": root.vdet},
                )
            )
        else:
            a, u = min(g["clusters"], key=lambda t: _digit_key(t[1], p, r + depth))
            absprec = r + depth
            point = tuple(_from_int_mod(p, v, absprec) for v in u)
            res = residual_valuations(polys, point)
            certs.append(
                SolutionCertificate(
                    point=point,
                    certified_digits=min(target_digits, *res) if res else target_digits,
                    residuals=res,
                    witness="exhaustive",
                    cluster=True,
                    roots_in_class=0,
                    notes=(f"{len(g['clusters'])} open sub-classes at depth {r + depth}",),
                    detail={"depth": r + depth},
                )
            )
    return certs


# -- contraction -------------------------------------------------------------


def fixed_point(
    f: Callable[[PadicNumber], PadicNumber],
    start: PadicNumber,
    target_digits: int,
    ball: BallSpec | None = None,
    max_iter: int | None = None,
) -> SolutionCertificate:
    """Iterate ``x <- f(x)`` until ``|f(x) - x| <= p**-target_digits``.

    With a contraction factor ``<= 1/p`` each step gains a digit, so the default
    budget is ``2 * target_digits + 8`` steps.  Ultrametricity makes the final
    step size an exact distance to the fixed point.
    """
    budget = max_iter if max_iter is not None else 2 * target_digits + 8
    x = start
    if ball is not None and not ball.contains((x,)):
        raise ValueError("start point lies outside the ball")
    ratios: list[Fraction] = []
    prev: Fraction | None = None
    for t in range(budget + 1):
        y = f(x)
        if ball is not None and not ball.contains((y,)):
            raise ConvergenceError(f"iterate {t + 1} left the ball", ratios)
        d = y - x
        if d.valuation >= target_digits:
            if d.is_zero() and d.valuation < target_digits:
                raise PrecisionError("working precision exhausted before the target")
            return SolutionCertificate(
                point=(x,),
                certified_digits=target_digits,
                residuals=(d.valuation,),
                witness="contraction",
                lift_history=(t,),
                detail={"iterations": t, "ratios": [str(q) for q in ratios]},
            )
        if d.is_zero():
            raise PrecisionError("working precision exhausted before the target")
        if prev is not None and prev:
            ratios.append(d.norm / prev)
        prev = d.norm
        x = y
    raise ConvergenceError(f"no convergence in {budget} iterations", ratios)


@dataclass(frozen=True)
class ContractionResult:
    max_ratio: Fraction
    argmax: tuple[PadicNumber, PadicNumber]
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "max_ratio": str(self.max_ratio),
            "argmax": [x.to_json() for x in self.argmax],
            "samples": self.samples,
            "seed": self.seed,
        }


def contraction_ratio(
    f: Callable[[PadicNumber], PadicNumber],
    ball: BallSpec,
    sample_count: int = 100,
    seed: int = 0,
    precision: int | None = None,
) -> ContractionResult:
    """Largest ``|f(x) - f(y)| / |x - y|`` over seeded pairs in a 1-d ball.

    When ``f(x) - f(y)`` vanishes at working precision its floor is used, which
    over-estimates the ratio.
    """
    if ball.dimension != 1:
        raise ValueError("contraction_ratio works on 1-d balls")
    p, r = ball.prime, ball.radius
    c = ball.center[0]
    prec = precision or c.absolute_precision
    cint = 0 if c.is_zero() else c.residue(prec)
    rng = random.Random(seed)
    span = p ** max(prec - r, 1)
    best, arg = Fraction(-1), None
    for _ in range(sample_count):
        while True:
            a, b = rng.randrange(span), rng.randrange(span)
            if a != b:
                break
        x = _from_int_mod(p, cint + p**r * a, prec)
        y = _from_int_mod(p, cint + p**r * b, prec)
        num = f(x) - f(y)
        den = (x - y).norm
        q = (Fraction(p) ** -num.valuation) / den
        if q > best:
            best, arg = q, (x, y)
    return ContractionResult(best, arg, sample_count, seed)
