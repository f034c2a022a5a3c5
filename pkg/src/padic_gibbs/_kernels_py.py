"""Pure-Python kernels.  Reference semantics for the compiled versions in
``_ckernels.pyx``; any modulus works here."""

from __future__ import annotations


def config_weights(nv: int, vertex_factors: list[int], pairs: list[tuple[int, int, int]], modulus: int) -> list[int]:
    """Product weight of every spin configuration on ``nv`` vertices.

    ``vertex_factors[3*v + s]`` multiplies when vertex ``v`` has spin ``s``;
    each ``(a, b, f)`` in ``pairs`` multiplies by ``f`` when vertices ``a`` and
    ``b`` carry equal spins.  Configurations are enumerated with vertex 0 as the
    most significant base-3 digit.
    """
    out = []
    spins = [0] * nv
    total = 3**nv
    for _ in range(total):
        w = 1
        for v in range(nv):
            w = w * vertex_factors[3 * v + spins[v]] % modulus
        for a, b, f in pairs:
            if spins[a] == spins[b]:
                w = w * f % modulus
        out.append(w)
        v = nv - 1
        while v >= 0:
            spins[v] += 1
            if spins[v] < 3:
                break
            spins[v] = 0
            v -= 1
    return out


def surviving_children(
    equations: list[list[tuple[tuple[int, ...], int]]],
    nvars: int,
    p: int,
    level: int,
    parents: list[tuple[int, ...]],
) -> list[tuple[int, ...]]:
    """Children of residue classes mod ``p**(level-1)`` on which every equation
    vanishes mod ``p**level``, in (parent, digit-tuple) lexicographic order."""
    modulus = p**level
    step = p ** (level - 1)
    eqs = [[(e, c % modulus) for e, c in eq] for eq in equations]
    degs = [max((e[i] for eq in eqs for e, _ in eq), default=0) for i in range(nvars)]
    out = []
    for parent in parents:
        if nvars == 1:
            digit_tuples = ((d,) for d in range(p))
        else:
            digit_tuples = ((d1, d2) for d1 in range(p) for d2 in range(p))
        for digits in digit_tuples:
            x = tuple(parent[i] + digits[i] * step for i in range(nvars))
            powers = []
            for i in range(nvars):
                pw = [1]
                for _ in range(degs[i]):
                    pw.append(pw[-1] * x[i] % modulus)
                powers.append(pw)
            ok = True
            for eq in eqs:
                s = 0
                for e, c in eq:
                    t = c
                    for i in range(nvars):
                        if e[i]:
                            t = t * powers[i][e[i]] % modulus
                    s += t
                if s % modulus:
                    ok = False
                    break
            if ok:
                out.append(x)
    return out
