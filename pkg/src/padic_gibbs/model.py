"""The three-state Potts model with nearest-neighbour (J), next-nearest-neighbour
(K) and external-field (H) couplings on the binary Cayley tree.

Two routes to the same objects are kept side by side on purpose: the
first-principles transfer sums ``T_i`` and the closed-form kernels ``F1``/``F2``,
and the per-configuration ``exp`` of the Hamiltonian against the kernel-backed
product weights.  Tests cross-check each pair.

Boundary convention: a field ``h_x`` on the boundary layer ``W_n`` already
absorbs that layer's external-field factor, i.e. the weight of spin ``s`` at a
boundary vertex is ``exp(h_x . zeta_s)`` alone.  Interior vertices carry
``theta1 ** [s == 3]``.  With ``absorbed=False`` the measure uses the literal
Hamiltonian over the whole volume instead; the two agree after shifting every
boundary field by ``-(H, H)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from . import kernels
from .padic import (
    DEFAULT_PRECISION,
    GUARD_DIGITS,
    DomainError,
    PadicNumber,
    PadicVec2,
    PrecisionError,
    _from_int_mod,
    exp_domain_valuation,
    exp_p,
    is_prime,
    log_p,
)
from .poly import InconsistencyError, PadicMPoly, PadicPoly, RationalMap
from .tree import TreeSlice, Vertex, build

__all__ = [
    "SPINS",
    "ModelParams",
    "SpinBasis",
    "spin_basis",
    "BoundaryField",
    "hamiltonian",
    "measure",
    "measure_table",
    "partition_function",
    "CompatibilityReport",
    "check_compatibility",
    "F1",
    "F2",
    "transfer_sum",
    "recursion_step",
    "recursion_step_kernels",
    "pull_back",
    "ti_system",
    "symmetric_map",
    "LineReduction",
    "line_quadratic",
    "printed_line_quadratic",
    "parse_scalar",
    "config_from_index",
    "config_index",
    "field_dot",
    "working_precision",
]

SPINS = (1, 2, 3)
P3_EXTRA_DIGITS = 7  # nu_3(Z_2) = |V_2|


def parse_scalar(value, prime: int, precision: int) -> PadicNumber:
    """Read a coupling from a config: int, ``"a/b"``, ``{"num", "den"}`` or the
    digit form ``{"p", "val", "digits"}``."""
    if isinstance(value, PadicNumber):
        return value.with_precision(precision) if not value.is_zero() else value
    if isinstance(value, bool):
        raise ValueError("booleans are not couplings")
    if isinstance(value, (int, Fraction)):
        return PadicNumber.from_rational(value, prime, precision)
    if isinstance(value, str):
        return PadicNumber.from_rational(Fraction(value), prime, precision)
    if isinstance(value, dict):
        if "digits" in value:
            x = PadicNumber.from_json(value)
            if x.prime != prime:
                raise ValueError(f"digit form has p = {x.prime}, expected {prime}")
            return x
        if "num" in value:
            return PadicNumber.from_rational(Fraction(int(value["num"]), int(value.get("den", 1))), prime, precision)
    raise ValueError(f"cannot read a p-adic coupling from {value!r}")


def _exact_value(value) -> Fraction | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            return None
    if isinstance(value, dict) and "num" in value and "digits" not in value:
        return Fraction(int(value["num"]), int(value.get("den", 1)))
    return None


def _domain_ok(x: PadicNumber) -> bool:
    return x.is_zero() or x.valuation >= exp_domain_valuation(x.prime)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Couplings at working precision plus their exponentials.

    ``edge_J`` overrides J on the edge ending at a given child vertex and
    ``pair_K`` overrides K on the sibling pair below a given parent.
    """

    prime: int
    precision: int
    J: PadicNumber
    K: PadicNumber
    H: PadicNumber
    edge_J: Mapping[Vertex, PadicNumber] = dc_field(default_factory=dict)
    pair_K: Mapping[Vertex, PadicNumber] = dc_field(default_factory=dict)
    strict: bool = True
    # exact rational inputs, when known, so precision can be raised later
    exact: Mapping = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.precision < 4:
            raise ValueError("precision must be at least 4")
        if self.strict:
            for name, x in self.named_couplings():
                if not _domain_ok(x):
                    raise DomainError(f"{name} = {x} is outside the exp_{self.prime} domain")

    @classmethod
    def create(
        cls,
        prime: int,
        J,
        K,
        H=0,
        precision: int = DEFAULT_PRECISION,
        edge_J: Mapping | None = None,
        pair_K: Mapping | None = None,
        strict: bool = True,
    ) -> ModelParams:
        w = working_precision(prime, precision)
        conv = lambda v: parse_scalar(v, prime, w)  # noqa: E731
        edge_J, pair_K = dict(edge_J or {}), dict(pair_K or {})
        exact = {}
        for key, v in [("J", J), ("K", K), ("H", H)] + [(("J", x), v) for x, v in edge_J.items()] + [
            (("K", x), v) for x, v in pair_K.items()
        ]:
            q = _exact_value(v)
            if q is not None:
                exact[key] = q
        return cls(
            prime,
            precision,
            conv(J),
            conv(K),
            conv(H),
            {v: conv(x) for v, x in edge_J.items()},
            {v: conv(x) for v, x in pair_K.items()},
            strict,
            exact,
        )

    def named_couplings(self):
        yield "J", self.J
        yield "K", self.K
        yield "H", self.H
        for v, x in sorted(self.edge_J.items()):
            yield f"J{v}", x
        for v, x in sorted(self.pair_K.items()):
            yield f"K{v}", x

    @property
    def working_precision(self) -> int:
        return working_precision(self.prime, self.precision)

    @property
    def homogeneous(self) -> bool:
        return not self.edge_J and not self.pair_K

    @cached_property
    def theta(self) -> PadicNumber:
        return exp_p(self.J)

    @cached_property
    def kappa(self) -> PadicNumber:
        return exp_p(self.K)

    @cached_property
    def theta1(self) -> PadicNumber:
        return exp_p(self.H)

    @cached_property
    def one(self) -> PadicNumber:
        return PadicNumber.one(self.prime, self.working_precision)

    def edge_theta(self, child: Vertex) -> PadicNumber:
        j = self.edge_J.get(child)
        return self.theta if j is None else exp_p(j)

    def pair_kappa(self, parent: Vertex) -> PadicNumber:
        k = self.pair_K.get(parent)
        return self.kappa if k is None else exp_p(k)

    def couplings_below(self, x: Vertex | None) -> tuple[PadicNumber, PadicNumber, PadicNumber]:
        """``(theta_xy, theta_xz, kappa_yz)`` for the successors ``y, z`` of ``x``."""
        if x is None or self.homogeneous:
            return self.theta, self.theta, self.kappa
        y, z = x.successors()
        return self.edge_theta(y), self.edge_theta(z), self.pair_kappa(x)

    def with_precision(self, precision: int) -> ModelParams:
        """Same model at another precision.  Exact inputs are re-embedded;
        others can only be truncated."""
        w = working_precision(self.prime, precision)
        ex = self.exact

        def adj(key, x):
            if key in ex:
                return PadicNumber.from_rational(ex[key], self.prime, w)
            return x if x.is_zero() else x.with_precision(w)

        return ModelParams(
            self.prime,
            precision,
            adj("J", self.J),
            adj("K", self.K),
            adj("H", self.H),
            {v: adj(("J", v), x) for v, x in self.edge_J.items()},
            {v: adj(("K", v), x) for v, x in self.pair_K.items()},
            self.strict,
            ex,
        )

    def _coupling_json(self, key, x: PadicNumber):
        q = self.exact.get(key)
        if q is not None:
            return {"num": q.numerator, "den": q.denominator}
        return x.to_json()

    def to_json(self) -> dict:
        """Exact inputs serialize as ``{num, den}`` so a reader can rebuild the
        model at any precision; others as digits."""
        out = {
            "p": self.prime,
            "precision": self.precision,
            "J": self._coupling_json("J", self.J),
            "K": self._coupling_json("K", self.K),
            "H": self._coupling_json("H", self.H),
        }
        if not self.homogeneous:
            out["couplings"] = {
                "J": [
                    [v.parent().to_json(), v.to_json(), self._coupling_json(("J", v), x)]
                    for v, x in sorted(self.edge_J.items())
                ],
                "K": [
                    [*(s.to_json() for s in v.successors()), self._coupling_json(("K", v), x)]
                    for v, x in sorted(self.pair_K.items())
                ],
            }
        return out

    @classmethod
    def from_json(cls, data: Mapping, precision: int | None = None, strict: bool = True) -> ModelParams:
        try:
            p = int(data["p"])
            prec = int(precision if precision is not None else data.get("precision", DEFAULT_PRECISION))
            edge_J, pair_K = {}, {}
            couplings = data.get("couplings") or {}
            for x, y, val in couplings.get("J", []):
                a, b = Vertex.from_json(x), Vertex.from_json(y)
                child = b if b.parent() == a else a if a.parent() == b else None
                if child is None:
                    raise ValueError(f"{a} and {b} are not adjacent")
                edge_J[child] = val
            for y, z, val in couplings.get("K", []):
                a, b = Vertex.from_json(y), Vertex.from_json(z)
                if a.parent() is None or a.parent() != b.parent() or a == b:
                    raise ValueError(f"{a} and {b} are not siblings")
                pair_K[a.parent()] = val
            return cls.create(p, data["J"], data["K"], data.get("H", 0), prec, edge_J, pair_K, strict)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model config: {exc}") from exc

    def __repr__(self):
        return f"ModelParams(p={self.prime}, N={self.precision}, J={self.J}, K={self.K}, H={self.H})"


def working_precision(prime: int, precision: int) -> int:
    return precision + GUARD_DIGITS + (P3_EXTRA_DIGITS if prime == 3 else 0)


# -- spins -------------------------------------------------------------------


@dataclass(frozen=True)
class SpinBasis:
    zeta1: PadicVec2
    zeta2: PadicVec2
    zeta3: PadicVec2

    def __getitem__(self, s: int) -> PadicVec2:
        return (self.zeta1, self.zeta2, self.zeta3)[s - 1]

    @staticmethod
    def pair(h, s: int):
        """``h . zeta_s`` for any indexable pair ``h``."""
        if s == 1:
            return h[0]
        if s == 2:
            return h[1]
        if s == 3:
            return h[0] + h[1]
        raise ValueError(f"spin index {s} not in 1..3")


def spin_basis(prime: int = 3, precision: int = DEFAULT_PRECISION) -> SpinBasis:
    one = PadicNumber.one(prime, precision)
    zero = PadicNumber.zero(prime, precision)
    z1, z2 = PadicVec2(one, zero), PadicVec2(zero, one)
    return SpinBasis(z1, z2, z1 + z2)


field_dot = SpinBasis.pair


# -- fields ------------------------------------------------------------------


class BoundaryField:
    """``h_x`` per vertex, or one translation-invariant value."""

    __slots__ = ("values", "uniform")

    def __init__(self, values: Mapping[Vertex, PadicVec2] | None = None, uniform: PadicVec2 | None = None):
        self.values = dict(values or {})
        self.uniform = uniform

    @classmethod
    def constant(cls, h: PadicVec2) -> BoundaryField:
        return cls(uniform=h)

    def __getitem__(self, x: Vertex) -> PadicVec2:
        h = self.values.get(x)
        if h is None:
            if self.uniform is None:
                raise KeyError(f"no field value at {x}")
            return self.uniform
        return h

    def __contains__(self, x: Vertex) -> bool:
        return x in self.values or self.uniform is not None

    def updated(self, changes: Mapping[Vertex, PadicVec2]) -> BoundaryField:
        values = dict(self.values)
        values.update(changes)
        return BoundaryField(values, self.uniform)

    def restricted(self, vertices: Sequence[Vertex]) -> BoundaryField:
        return BoundaryField({x: self[x] for x in vertices})

    def to_json(self) -> list:
        return [[x.to_json(), h.c1.to_json(), h.c2.to_json()] for x, h in sorted(self.values.items())]

    @classmethod
    def from_json(cls, data, prime: int, precision: int) -> BoundaryField:
        values = {}
        for row in data:
            v, h1, h2 = row
            values[Vertex.from_json(v)] = PadicVec2(parse_scalar(h1, prime, precision), parse_scalar(h2, prime, precision))
        return cls(values)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def field_in_domain(h: PadicVec2) -> bool:
    return _domain_ok(h.c1) and _domain_ok(h.c2)


# -- Hamiltonian and measures ------------------------------------------------


def _check_config(sigma: Mapping[Vertex, int], tree: TreeSlice):
    for x in tree.vertices:
        if sigma.get(x) not in SPINS:
            raise ValueError(f"configuration is not total on V_{tree.depth}: missing or bad spin at {x}")


def hamiltonian(sigma: Mapping[Vertex, int], params: ModelParams, tree: TreeSlice) -> PadicNumber:
    """``-sum_edges J d - sum_siblings K d - H #{x : sigma(x) = 3}`` over ``V_n``."""
    _check_config(sigma, tree)
    acc = PadicNumber.zero(params.prime, params.working_precision)
    for x, y in tree.edges:
        if sigma[x] == sigma[y]:
            acc = acc - params.edge_J.get(y, params.J)
    for x in tree.interior:
        y, z = x.successors()
        if sigma[y] == sigma[z]:
            acc = acc - params.pair_K.get(x, params.K)
    n3 = sum(1 for x in tree.vertices if sigma[x] == 3)
    return acc - params.H * n3


def config_from_index(index: int, vertices: Sequence[Vertex]) -> dict[Vertex, int]:
    """Inverse of the canonical enumeration (first vertex most significant)."""
    out = {}
    for x in reversed(vertices):
        index, s = divmod(index, 3)
        out[x] = s + 1
    return out


def config_index(sigma: Mapping[Vertex, int], vertices: Sequence[Vertex]) -> int:
    idx = 0
    for x in vertices:
        idx = 3 * idx + sigma[x] - 1
    return idx


def _weights(field: BoundaryField, params: ModelParams, depth: int, absorbed: bool = True) -> tuple[list[int], int]:
    """Unnormalized weights of all configurations on ``V_depth`` as integers mod
    ``p**digits``; returns ``(weights, digits)``."""
    tree = build(depth)
    p = params.prime
    digits = params.working_precision
    theta1 = params.theta1
    factors: list[PadicNumber | int] = []
    for x in tree.vertices:
        if x.level < depth:
            row = [1, 1, theta1]
        else:
            h = field[x]
            row = [exp_p(field_dot(h, s)) for s in SPINS]
            if not absorbed:
                row[2] = row[2] * theta1
        factors.extend(row)
    pair_factors = []
    pos = tree.position
    for x, y in tree.edges:
        pair_factors.append((pos[x], pos[y], params.edge_theta(y)))
    for x in tree.interior:
        y, z = x.successors()
        pair_factors.append((pos[y], pos[z], params.pair_kappa(x)))
    for f in factors:
        if isinstance(f, PadicNumber):
            digits = min(digits, f.absolute_precision)
    for *_, f in pair_factors:
        digits = min(digits, f.absolute_precision)
    if digits <= 0:
        raise PrecisionError("weights carry no certified digits")
    vf = [f if isinstance(f, int) else f.residue(digits) for f in factors]
    pairs = [(a, b, f.residue(digits)) for a, b, f in pair_factors]
    return kernels.config_weights(len(tree.vertices), vf, pairs, p**digits), digits


def partition_function(field: BoundaryField, params: ModelParams, tree: TreeSlice, absorbed: bool = True) -> PadicNumber:
    weights, digits = _weights(field, params, tree.depth, absorbed)
    z = _from_int_mod(params.prime, sum(weights), digits)
    if z.is_zero():
        raise PrecisionError(f"Z_{tree.depth} is indistinguishable from zero at {digits} digits")
    return z


def measure(
    sigma: Mapping[Vertex, int],
    field: BoundaryField,
    params: ModelParams,
    tree: TreeSlice,
    absorbed: bool = True,
) -> PadicNumber:
    """``exp_p(-H_n(sigma) + sum_{x in W_n} h_x . sigma(x)) / Z_n``, evaluated
    through the Hamiltonian (the product-weight route is only used for Z_n)."""
    exponent = -hamiltonian(sigma, params, tree)
    for x in tree.boundary:
        exponent = exponent + field_dot(field[x], sigma[x])
        if absorbed and sigma[x] == 3:
            exponent = exponent - params.H
    return exp_p(exponent) / partition_function(field, params, tree, absorbed)


def measure_table(field: BoundaryField, params: ModelParams, tree: TreeSlice, absorbed: bool = True) -> list[PadicNumber]:
    """``mu(sigma)`` for every configuration in canonical order."""
    weights, digits = _weights(field, params, tree.depth, absorbed)
    p = params.prime
    z = _from_int_mod(p, sum(weights), digits)
    if z.is_zero():
        raise PrecisionError(f"Z_{tree.depth} is indistinguishable from zero at {digits} digits")
    return [_from_int_mod(p, w, digits) / z for w in weights]


@dataclass(frozen=True)
class CompatibilityReport:
    passed: bool
    depth: int
    max_violation: Fraction
    certified_digits: int
    required_digits: int
    worst_cylinder: int
    cylinders: int
    terms: int
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "depth": self.depth,
            "max_violation_norm": str(self.max_violation),
            "certified_digits": self.certified_digits,
            "required_digits": self.required_digits,
            "worst_cylinder": self.worst_cylinder,
            "cylinders": self.cylinders,
            "terms": self.terms,
            "reason": self.reason,
        }


def check_compatibility(
    field: BoundaryField,
    params: ModelParams,
    depth: int = 2,
    digits: int | None = None,
    max_terms: int = 3**7,
) -> CompatibilityReport:
    """Does summing ``mu^(n)`` over the last layer reproduce ``mu^(n-1)``?

    ``field`` must be defined on ``W_{n-1}`` and ``W_n``.  A cylinder passes
    when its discrepancy vanishes to ``digits`` digits relative to
    ``mu^(n-1)`` of that cylinder (default: the model precision).
    """
    if depth < 1:
        raise ValueError("compatibility needs depth >= 1")
    terms = 3 ** (2 ** (depth + 1) - 1)
    if terms > max_terms:
        raise ValueError(f"depth {depth} needs {terms} terms per check, over the budget of {max_terms}")
    need = params.precision if digits is None else digits
    p = params.prime
    wn, dn = _weights(field, params, depth)
    wm, dm = _weights(field, params, depth - 1)
    zn = _from_int_mod(p, sum(wn), dn)
    zm = _from_int_mod(p, sum(wm), dm)
    if zn.is_zero() or zm.is_zero():
        raise PrecisionError("partition function indistinguishable from zero")
    block = len(wn) // len(wm)
    worst, worst_idx, certified, ok, reason = Fraction(0), 0, None, True, ""
    for s, w in enumerate(wm):
        marginal = _from_int_mod(p, sum(wn[s * block : (s + 1) * block]), dn) / zn
        target = _from_int_mod(p, w, dm) / zm
        diff = marginal - target
        if diff.is_zero():
            got = diff.valuation - target.valuation
            if got < need:
                ok = False
                reason = reason or f"cylinder {s}: only {got} digits certified"
        else:
            got = diff.valuation - target.valuation
            if got < need:
                ok = False
                reason = reason or f"cylinder {s}: discrepancy of norm {diff.norm}"
            if diff.norm > worst:
                worst, worst_idx = diff.norm, s
        certified = got if certified is None else min(certified, got)
    return CompatibilityReport(ok, depth, worst, certified, need, worst_idx, len(wm), len(wn), reason)


# -- recursion kernels -------------------------------------------------------


def F1(a1, a2, b, h, r):
    """Kernel of the numerator; ring-generic in all arguments."""
    h1, h2 = h[0], h[1]
    r1, r2 = r[0], r[1]
    return (
        a1 * a2 * b * h1 * h2 * r1 * r2
        + a1 * h1 * h2 * (r1 + r2)
        + a2 * r1 * r2 * (h1 + h2)
        + b * (h1 * r1 + h2 * r2)
        + h1 * r2
        + h2 * r1
    )


def F2(a1, a2, b, h, r):
    """Kernel of the denominator; ring-generic in all arguments."""
    h1, h2 = h[0], h[1]
    r1, r2 = r[0], r[1]
    return (
        b * h1 * h2 * r1 * r2
        + a1 * h1 * r1 * r2
        + a2 * h1 * h2 * r1
        + h2 * r1 * r2
        + h1 * h2 * r2
        + a1 * h1 * r2
        + a2 * h2 * r1
        + b * h2 * r2
        + a1 * a2 * b * h1 * r1
    )


def transfer_sum(i: int, a1, a2, b, U: Sequence, V: Sequence):
    """``T_i = sum_{a,b} a1^[i=a] a2^[i=b] b^[a=b] U_a V_b`` with ``U``, ``V``
    indexed by spin - 1."""
    acc = None
    for sa in SPINS:
        for sb in SPINS:
            t = U[sa - 1] * V[sb - 1]
            if sa == i:
                t = a1 * t
            if sb == i:
                t = a2 * t
            if sa == sb:
                t = b * t
            acc = t if acc is None else acc + t
    return acc


def _safe_log(x: PadicNumber) -> PadicNumber:
    try:
        return log_p(x)
    except DomainError as exc:
        raise InconsistencyError(f"transfer ratio {x} left the log domain") from exc


def recursion_step(h_y: PadicVec2, h_z: PadicVec2, params: ModelParams, parent: Vertex | None = None) -> PadicVec2:
    """Field at ``parent`` from the fields at its successors, via the transfer
    sums: ``(log(theta1 T3 / T2), log(theta1 T3 / T1))``."""
    a1, a2, b = params.couplings_below(parent)
    U = [exp_p(field_dot(h_y, s)) for s in SPINS]
    V = [exp_p(field_dot(h_z, s)) for s in SPINS]
    t1, t2, t3 = (transfer_sum(i, a1, a2, b, U, V) for i in SPINS)
    num = params.theta1 * t3
    return PadicVec2(_safe_log(num / t2), _safe_log(num / t1))


def recursion_step_kernels(h_y: PadicVec2, h_z: PadicVec2, params: ModelParams, parent: Vertex | None = None) -> PadicVec2:
    """Same map through ``F1``/``F2``; the first component uses transposed
    arguments, which is what matches the transfer-sum normalization."""
    a1, a2, b = params.couplings_below(parent)
    uy, uz = h_y.exp(), h_z.exp()
    uyt, uzt = uy.swapped(), uz.swapped()
    th1 = params.theta1
    c1 = _safe_log(th1 * F1(a1, a2, b, uyt, uzt) / F2(a1, a2, b, uyt, uzt))
    c2 = _safe_log(th1 * F1(a1, a2, b, uy, uz) / F2(a1, a2, b, uy, uz))
    return PadicVec2(c1, c2)


def pull_back(boundary: BoundaryField, params: ModelParams, depth: int) -> BoundaryField:
    """Extend a field on ``W_depth`` to all of ``V_depth`` by the recursion."""
    tree = build(depth)
    values = {x: boundary[x] for x in tree.boundary}
    for m in range(depth - 1, -1, -1):
        for x in tree.sphere(m):
            y, z = x.successors()
            values[x] = recursion_step(values[y], values[z], params, x)
    return BoundaryField(values)


# -- translation-invariant reductions ----------------------------------------


def _require_homogeneous(params: ModelParams):
    if not params.homogeneous:
        raise ValueError("translation-invariant reductions need homogeneous couplings")


def ti_system(params: ModelParams) -> tuple[PadicMPoly, PadicMPoly]:
    """``(u1 T2 - theta1 T3, u2 T1 - theta1 T3)`` in ``u = exp(h)``, built from
    the same transfer sums as :func:`recursion_step`."""
    _require_homogeneous(params)
    one = params.one
    x1 = PadicMPoly.variable(0, 2, one)
    x2 = PadicMPoly.variable(1, 2, one)
    U = (x1, x2, x1 * x2)
    th, ka = params.theta, params.kappa
    t1, t2, t3 = (transfer_sum(i, th, th, ka, U, U) for i in SPINS)
    rhs = t3 * params.theta1
    return x1 * t2 - rhs, x2 * t1 - rhs


def symmetric_map(params: ModelParams) -> RationalMap:
    """``theta1 (th^2 ka x^2 + 4 th x + 2(ka + 1)) / (ka x^2 + 2(th + 1) x + th^2 ka + 2 th + ka)``."""
    _require_homogeneous(params)
    th, ka = params.theta, params.kappa
    num = PadicPoly([2 * (ka + 1), 4 * th, th * th * ka])
    den = PadicPoly([th * th * ka + 2 * th + ka, 2 * (th + 1), ka])
    return RationalMap(num, den, params.theta1)


def printed_line_quadratic(params: ModelParams) -> PadicPoly:
    """The quadratic as printed: ``2(ka+1)u^2 + (2 + 2th - ka - th^2 ka)u - ka``."""
    th, ka = params.theta, params.kappa
    return PadicPoly([-ka, 2 + 2 * th - ka - th * th * ka, 2 * (ka + 1)])


@dataclass(frozen=True)
class LineReduction:
    cubic: PadicPoly
    quadratic: PadicPoly
    remainder: PadicNumber
    printed: PadicPoly
    diff: tuple[dict, ...]
    printed_value_at_one: PadicNumber
    derived_value_at_one: PadicNumber

    def to_json(self) -> dict:
        return {
            "derived": [c.to_json() for c in self.quadratic.coefficients],
            "printed": [c.to_json() for c in self.printed.coefficients],
            "diff": list(self.diff),
            "printed_at_1": self.printed_value_at_one.to_json(),
            "derived_at_1": self.derived_value_at_one.to_json(),
        }


def line_quadratic(params: ModelParams) -> LineReduction:
    """Restrict the first invariant-system equation to the line ``u2 = 1``,
    deflate the known root ``u = 1`` and compare with the printed quadratic."""
    _require_homogeneous(params)
    if not params.H.is_zero():
        raise ValueError("the line u2 = 1 is only invariant when H = 0")
    eq1, _ = ti_system(params)
    cubic = eq1.substitute(1, params.one).to_univariate(0)
    quad, rem = cubic.deflate(params.one)
    if not rem.is_zero():
        raise InconsistencyError(f"u = 1 is not a root of the line cubic (remainder {rem})")
    printed = printed_line_quadratic(params)
    diff = []
    for k in range(max(len(quad.coefficients), len(printed.coefficients))):
        d = quad.coefficients[k] if k < len(quad.coefficients) else None
        q = printed.coefficients[k] if k < len(printed.coefficients) else None
        if d is None or q is None or not (d - q).is_zero():
            diff.append(
                {
                    "power": k,
                    "derived": d.to_json() if d is not None else None,
                    "printed": q.to_json() if q is not None else None,
                }
            )
    one = params.one
    return LineReduction(cubic, quad, rem, printed, tuple(diff), printed(one), quad(one))
