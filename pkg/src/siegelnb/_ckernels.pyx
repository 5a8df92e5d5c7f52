# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated series over Z[zeta].

Same contract as ``_pykernels``.  Each routine first checks whether every
intermediate value provably fits a signed 64-bit accumulator; if so it runs
a C loop, otherwise it falls back to typed loops over Python ints.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset


cdef int _bits(list buf):
    cdef int best = 0
    cdef int b
    for x in buf:
        if x:
            b = (<object>x).bit_length()
            if b > best:
                best = b
    return best


cdef int _red_bits(list red, Py_ssize_t phi):
    # bit length of 1 + sum of |entries| of the reduction table
    cdef object total = 1
    for row in red:
        for r in row:
            total += abs(r)
    return (<object>total).bit_length()


cdef int _ilog2(Py_ssize_t n):
    cdef int b = 0
    while (<Py_ssize_t>1 << b) < n:
        b += 1
    return b


cdef list _mul_trunc_c(list a, Py_ssize_t na, list b, Py_ssize_t nb,
                       Py_ssize_t n, Py_ssize_t phi, list red):
    cdef Py_ssize_t width = 2 * phi - 1
    cdef Py_ssize_t i, j, k, p, q, lo, hi
    cdef long long *ca = <long long *>malloc(max(na * phi, 1) * sizeof(long long))
    cdef long long *cb = <long long *>malloc(max(nb * phi, 1) * sizeof(long long))
    cdef long long *cr = <long long *>malloc(max((phi - 1) * phi, 1) * sizeof(long long))
    cdef long long *raw = <long long *>malloc(width * sizeof(long long))
    cdef long long *res = <long long *>malloc(max(n * phi, 1) * sizeof(long long))
    cdef long long x, c
    cdef list out
    try:
        for i in range(na * phi):
            ca[i] = a[i]
        for i in range(nb * phi):
            cb[i] = b[i]
        for k in range(phi - 1):
            for p in range(phi):
                cr[k * phi + p] = red[k][p]
        memset(res, 0, max(n * phi, 1) * sizeof(long long))
        for k in range(n):
            memset(raw, 0, width * sizeof(long long))
            lo = k - nb + 1
            if lo < 0:
                lo = 0
            hi = k
            if hi > na - 1:
                hi = na - 1
            for i in range(lo, hi + 1):
                j = k - i
                for p in range(phi):
                    x = ca[i * phi + p]
                    if x != 0:
                        for q in range(phi):
                            raw[p + q] += x * cb[j * phi + q]
            for p in range(phi):
                res[k * phi + p] = raw[p]
            for q in range(phi, width):
                c = raw[q]
                if c != 0:
                    for p in range(phi):
                        res[k * phi + p] += c * cr[(q - phi) * phi + p]
        out = [res[i] for i in range(n * phi)]
    finally:
        free(ca)
        free(cb)
        free(cr)
        free(raw)
        free(res)
    return out


cdef void _reduce_obj(list raw, list out, Py_ssize_t base, Py_ssize_t phi, list red):
    cdef Py_ssize_t p, k
    cdef list row
    for p in range(phi):
        out[base + p] = raw[p]
    for k in range(phi, 2 * phi - 1):
        c = raw[k]
        if c:
            row = <list>red[k - phi]
            for p in range(phi):
                r = row[p]
                if r:
                    out[base + p] = out[base + p] + c * r


cdef list _mul_trunc_obj(list a, Py_ssize_t na, list b, Py_ssize_t nb,
                         Py_ssize_t n, Py_ssize_t phi, list red):
    cdef Py_ssize_t width = 2 * phi - 1
    cdef Py_ssize_t i, j, k, p, q, lo, hi, ia, jb
    cdef list out = [0] * (n * phi)
    cdef list raw
    cdef bint hit
    cdef char *nza = <char *>malloc(max(na, 1))
    cdef char *nzb = <char *>malloc(max(nb, 1))
    try:
        for i in range(na):
            nza[i] = 0
            for p in range(phi):
                if a[i * phi + p]:
                    nza[i] = 1
                    break
        for j in range(nb):
            nzb[j] = 0
            for p in range(phi):
                if b[j * phi + p]:
                    nzb[j] = 1
                    break
        for k in range(n):
            lo = k - nb + 1
            if lo < 0:
                lo = 0
            hi = k
            if hi > na - 1:
                hi = na - 1
            if lo > hi:
                continue
            raw = [0] * width
            hit = False
            for i in range(lo, hi + 1):
                j = k - i
                if not nza[i] or not nzb[j]:
                    continue
                hit = True
                ia = i * phi
                jb = j * phi
                for p in range(phi):
                    x = a[ia + p]
                    if x:
                        for q in range(phi):
                            y = b[jb + q]
                            if y:
                                raw[p + q] = raw[p + q] + x * y
            if hit:
                _reduce_obj(raw, out, k * phi, phi, red)
    finally:
        free(nza)
        free(nzb)
    return out


def mul_trunc(list a, Py_ssize_t na, list b, Py_ssize_t nb,
              Py_ssize_t n, Py_ssize_t phi, list red):
    """Product of two coefficient buffers, truncated to ``n`` coefficients."""
    if n <= 0:
        return []
    if na > n:
        na = n
    if nb > n:
        nb = n
    cdef int need = (_bits(a[:na * phi]) + _bits(b[:nb * phi])
                     + _ilog2(min(na, nb) * phi + 1) + _red_bits(red, phi))
    if need < 62:
        return _mul_trunc_c(a, na, b, nb, n, phi, red)
    return _mul_trunc_obj(a, na, b, nb, n, phi, red)


def mul_scalar(list x, list y, Py_ssize_t phi, list red):
    """Product of two single coordinate vectors, reduced."""
    cdef Py_ssize_t p, q
    cdef list raw = [0] * (2 * phi - 1)
    cdef list out = [0] * phi
    for p in range(phi):
        xp = x[p]
        if xp:
            for q in range(phi):
                raw[p + q] = raw[p + q] + xp * y[q]
    _reduce_obj(raw, out, 0, phi, red)
    return out


def mul_binomial(list a, Py_ssize_t n, Py_ssize_t phi, list red,
                 Py_ssize_t shift, list z):
    """Multiply by ``1 - z*t**shift`` (``shift >= 1``), truncated to ``n``."""
    cdef Py_ssize_t k, p, q, src, base
    cdef Py_ssize_t have = len(a) // phi
    cdef list out = list(a[:n * phi])
    cdef list raw
    cdef list tmp = [0] * phi
    cdef bint nz
    if have < n:
        out.extend([0] * ((n - have) * phi))
    for k in range(n - 1, shift - 1, -1):
        if k - shift >= have:
            continue
        src = (k - shift) * phi
        nz = False
        for p in range(phi):
            if a[src + p]:
                nz = True
                break
        if not nz:
            continue
        raw = [0] * (2 * phi - 1)
        for p in range(phi):
            xp = a[src + p]
            if xp:
                for q in range(phi):
                    zq = z[q]
                    if zq:
                        raw[p + q] = raw[p + q] + xp * zq
        _reduce_obj(raw, tmp, 0, phi, red)
        base = k * phi
        for p in range(phi):
            out[base + p] = out[base + p] - tmp[p]
    return out


def inv_scaled(list u, Py_ssize_t n, Py_ssize_t phi, list red, den):
    """Scaled inverse of ``u/den`` where ``u[0] == den``; see ``_pykernels``."""
    cdef Py_ssize_t j, k, p, q, base
    cdef list out = [0] * (n * phi)
    cdef list scaled = [None] * max(n, 1)
    cdef list raw, uj
    cdef char *nz = <char *>malloc(max(n, 1))
    if n == 0:
        free(nz)
        return out
    try:
        power = 1
        for j in range(1, n):
            uj = [c * power for c in u[j * phi:(j + 1) * phi]]
            scaled[j] = uj
            nz[j] = 0
            for p in range(phi):
                if uj[p]:
                    nz[j] = 1
                    break
            power = power * den
        out[0] = 1
        for k in range(1, n):
            raw = [0] * (2 * phi - 1)
            for j in range(1, k + 1):
                if not nz[j]:
                    continue
                uj = <list>scaled[j]
                base = (k - j) * phi
                for p in range(phi):
                    x = uj[p]
                    if x:
                        for q in range(phi):
                            y = out[base + q]
                            if y:
                                raw[p + q] = raw[p + q] - x * y
            _reduce_obj(raw, out, k * phi, phi, red)
    finally:
        free(nz)
    return out
