# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; moduli must be below 2**63.  See ``_kernels_py`` for the
reference semantics."""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t _mulmod(uint64_t a, uint64_t b, uint64_t m) {
        return (uint64_t)(((unsigned __int128)a * b) % m);
    }
    """
    uint64_t _mulmod(uint64_t a, uint64_t b, uint64_t m) nogil


def config_weights(int nv, list vertex_factors, list pairs, object modulus):
    cdef uint64_t M = <uint64_t>modulus
    cdef int npairs = len(pairs)
    cdef uint64_t *vf = <uint64_t *>malloc(3 * nv * sizeof(uint64_t))
    cdef int *pa = <int *>malloc((npairs + 1) * sizeof(int))
    cdef int *pb = <int *>malloc((npairs + 1) * sizeof(int))
    cdef uint64_t *pf = <uint64_t *>malloc((npairs + 1) * sizeof(uint64_t))
    cdef int *spins = <int *>malloc((nv + 1) * sizeof(int))
    cdef long total = 1
    cdef long n
    cdef int v, k
    cdef uint64_t w
    if not vf or not pa or not pb or not pf or not spins:
        raise MemoryError()
    try:
        for v in range(3 * nv):
            vf[v] = <uint64_t>(vertex_factors[v] % modulus)
        for k in range(npairs):
            a, b, f = pairs[k]
            pa[k] = a
            pb[k] = b
            pf[k] = <uint64_t>(f % modulus)
        for v in range(nv):
            spins[v] = 0
            total *= 3
        out = [0] * total
        for n in range(total):
            w = 1 % M
            for v in range(nv):
                w = _mulmod(w, vf[3 * v + spins[v]], M)
            for k in range(npairs):
                if spins[pa[k]] == spins[pb[k]]:
                    w = _mulmod(w, pf[k], M)
            out[n] = w
            v = nv - 1
            while v >= 0:
                spins[v] += 1
                if spins[v] < 3:
                    break
                spins[v] = 0
                v -= 1
        return out
    finally:
        free(vf); free(pa); free(pb); free(pf); free(spins)


def surviving_children(list equations, int nvars, object p, int level, list parents):
    cdef uint64_t M = <uint64_t>(p ** level)
    cdef uint64_t step = <uint64_t>(p ** (level - 1))
    cdef uint64_t P = <uint64_t>p
    cdef int neq = len(equations)
    cdef int nterms = 0
    cdef int i, j, t, q, d1, d2, e
    cdef int maxdeg = 0
    for eq in equations:
        nterms += len(eq)
        for ex, c in eq:
            for i in range(nvars):
                if ex[i] > maxdeg:
                    maxdeg = ex[i]
    cdef int *eq_start = <int *>malloc((neq + 1) * sizeof(int))
    cdef int *exps = <int *>malloc((nterms * nvars + 1) * sizeof(int))
    cdef uint64_t *coef = <uint64_t *>malloc((nterms + 1) * sizeof(uint64_t))
    cdef uint64_t *pw = <uint64_t *>malloc((nvars * (maxdeg + 1) + 1) * sizeof(uint64_t))
    cdef uint64_t x[2]
    cdef uint64_t acc, term
    cdef bint ok
    if not eq_start or not exps or not coef or not pw:
        raise MemoryError()
    out = []
    try:
        t = 0
        for q in range(neq):
            eq_start[q] = t
            for ex, c in equations[q]:
                for i in range(nvars):
                    exps[t * nvars + i] = ex[i]
                coef[t] = <uint64_t>(c % (p ** level))
                t += 1
        eq_start[neq] = t
        for parent in parents:
            for d1 in range(P):
                for d2 in range(P if nvars == 2 else 1):
                    x[0] = (<uint64_t>parent[0] + <uint64_t>d1 * step) % M
                    if nvars == 2:
                        x[1] = (<uint64_t>parent[1] + <uint64_t>d2 * step) % M
                    for i in range(nvars):
                        pw[i * (maxdeg + 1)] = 1 % M
                        for e in range(1, maxdeg + 1):
                            pw[i * (maxdeg + 1) + e] = _mulmod(pw[i * (maxdeg + 1) + e - 1], x[i], M)
                    ok = True
                    for q in range(neq):
                        acc = 0
                        for t in range(eq_start[q], eq_start[q + 1]):
                            term = coef[t]
                            for i in range(nvars):
                                e = exps[t * nvars + i]
                                if e:
                                    term = _mulmod(term, pw[i * (maxdeg + 1) + e], M)
                            acc = (acc + term) % M
                        if acc != 0:
                            ok = False
                            break
                    if ok:
                        if nvars == 2:
                            out.append((int(x[0]), int(x[1])))
                        else:
                            out.append((int(x[0]),))
        return out
    finally:
        free(eq_start); free(exps); free(coef); free(pw)
