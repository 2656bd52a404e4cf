# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of :mod:`mapair._kernels_py`.

Same signatures and semantics; only the loop variables are typed.
"""

from math import gcd

cpdef int merge_sign(tuple a, tuple b):
    """Return the sign of the shuffle sorting ``a + b``, or 0 if they overlap."""
    cdef Py_ssize_t inversions = 0
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t la = len(a)
    cdef object y
    for y in b:
        while i < la and a[i] < y:
            i += 1
        if i < la and a[i] == y:
            return 0
        inversions += la - i
    return -1 if inversions & 1 else 1


def wedge_terms(a, b):
    """Wedge product of two sparse alternating forms given as term dicts."""
    cdef dict out = {}
    cdef int s
    cdef tuple ka, kb
    for ka, va in a.items():
        sa = set(ka)
        for kb, vb in b.items():
            if not sa.isdisjoint(kb):
                continue
            s = merge_sign(ka, kb)
            key = tuple(sorted(ka + kb))
            val = va * vb if s > 0 else -(va * vb)
            prev = out.get(key)
            if prev is None:
                out[key] = val
            else:
                val = prev + val
                if val:
                    out[key] = val
                else:
                    del out[key]
    return {k: v for k, v in out.items() if v}


def poly_mul(a, b):
    """Product of two sparse polynomials keyed by exponent tuples."""
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple([x + y for x, y in zip(ea, eb)])
            val = ca * cb
            prev = out.get(key)
            if prev is not None:
                val = prev + val
            out[key] = val
    return {k: v for k, v in out.items() if v}


def plucker_residual(terms, k):
    """Return the first non-vanishing quadratic Plücker relation, or None.

    ``terms`` maps increasing ``k``-tuples to coefficients.  The relations are
    indexed by a ``(k-1)``-tuple ``J`` and a ``(k+1)``-tuple ``K``; each one is
    accumulated from pairs of support terms so the cost is quadratic in the
    support size.  The return value is ``(J, K, value)``.
    """
    if k < 2:
        return None
    cdef dict acc = {}
    cdef list items = list(terms.items())
    cdef Py_ssize_t pos_s, ell
    cdef int sign_js
    cdef tuple S, T, J, K
    for S, ps in items:
        for pos_s, s in enumerate(S):
            J = S[:pos_s] + S[pos_s + 1:]
            # (J, s) sorted into S: s moves from the end to position pos_s
            sign_js = -1 if (k - 1 - pos_s) & 1 else 1
            for T, pt in items:
                if s in T:
                    continue
                # K = T with s inserted; ell = 1-based position of s in K
                ell = 1
                for t in T:
                    if t < s:
                        ell += 1
                    else:
                        break
                K = T[:ell - 1] + (s,) + T[ell - 1:]
                val = ps * pt
                if (ell & 1) != (sign_js < 0):
                    val = -val
                key = (J, K)
                acc[key] = acc.get(key, 0) + val
    for key, val in acc.items():
        if val:
            return key[0], key[1], val
    return None


def _row_content(row):
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    return g


def sparse_rref(rows, ncols):
    """Fraction-free Gauss-Jordan elimination on sparse integer rows.

    ``rows`` is a list of ``{column: int}`` dicts (not modified).  Returns
    ``(pivots, reduced)`` where ``reduced[r]`` has its pivot at column
    ``pivots[r]`` and no other reduced row has a nonzero entry there.  Rows are
    kept primitive (content 1) with positive pivots.
    """
    work = [dict(r) for r in rows if r]
    pivots = []
    reduced = []
    col_rows = {}
    for idx, r in enumerate(work):
        for c in r:
            col_rows.setdefault(c, set()).add(idx)
    alive = set(range(len(work)))
    for col in range(ncols):
        cand = [i for i in col_rows.get(col, ()) if i in alive]
        if not cand:
            continue
        piv = min(cand, key=lambda i: (len(work[i]), abs(work[i][col])))
        prow = work[piv]
        alive.discard(piv)
        p = prow[col]
        targets = [i for i in col_rows.get(col, ()) if i != piv and i in alive]
        for t in targets:
            trow = work[t]
            a = trow[col]
            g = gcd(p, a)
            mp, ma = p // g, a // g
            new = {}
            for c2, v in trow.items():
                new[c2] = v * mp
            for c2, v in prow.items():
                val = new.get(c2, 0) - ma * v
                if val:
                    new[c2] = val
                else:
                    new.pop(c2, None)
            for c2 in trow:
                if c2 not in new:
                    col_rows[c2].discard(t)
            for c2 in new:
                col_rows.setdefault(c2, set()).add(t)
            cg = _row_content(new) if new else 1
            if cg > 1:
                new = {c2: v // cg for c2, v in new.items()}
            work[t] = new
            if not new:
                alive.discard(t)
        # back-substitute into already reduced rows
        for j, rr in enumerate(reduced):
            if col in rr:
                a = rr[col]
                g = gcd(p, a)
                mp, ma = p // g, a // g
                new = {c2: v * mp for c2, v in rr.items()}
                for c2, v in prow.items():
                    val = new.get(c2, 0) - ma * v
                    if val:
                        new[c2] = val
                    else:
                        new.pop(c2, None)
                cg = _row_content(new)
                if cg > 1:
                    new = {c2: v // cg for c2, v in new.items()}
                if new[pivots[j]] < 0:
                    new = {c2: -v for c2, v in new.items()}
                reduced[j] = new
        for c2 in prow:
            col_rows[c2].discard(piv)
        cg = _row_content(prow)
        if cg > 1:
            prow = {c2: v // cg for c2, v in prow.items()}
        if prow[col] < 0:
            prow = {c2: -v for c2, v in prow.items()}
        pivots.append(col)
        reduced.append(prow)
    return pivots, reduced
