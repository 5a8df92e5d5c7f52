"""Pure-Python reference kernels for truncated series over Z[zeta].

A series is passed as a flat list of Python ints: coefficient ``k`` occupies
``buf[k*phi:(k+1)*phi]`` (power-basis coordinates).  ``red`` holds the
reductions of ``x**phi .. x**(2*phi-2)`` modulo the cyclotomic polynomial,
each a list of ``phi`` ints.  The compiled module ``_ckernels`` exposes the
same four functions with identical semantics.
"""


def _reduce_into(raw, out, base, phi, red):
    for p in range(phi):
        out[base + p] = raw[p]
    for k in range(phi, 2 * phi - 1):
        c = raw[k]
        if c:
            row = red[k - phi]
            for p in range(phi):
                r = row[p]
                if r:
                    out[base + p] += c * r


def mul_trunc(a, na, b, nb, n, phi, red):
    """Product of two coefficient buffers, truncated to ``n`` coefficients."""
    width = 2 * phi - 1
    out = [0] * (n * phi)
    nz_a = [i for i in range(na) if any(a[i * phi:(i + 1) * phi])]
    nz_b = set(j for j in range(nb) if any(b[j * phi:(j + 1) * phi]))
    for k in range(n):
        raw = [0] * width
        hit = False
        for i in nz_a:
            if i > k:
                break
            j = k - i
            if j not in nz_b:
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
                            raw[p + q] += x * y
        if hit:
            _reduce_into(raw, out, k * phi, phi, red)
    return out


def mul_scalar(x, y, phi, red):
    """Product of two single coordinate vectors, reduced."""
    raw = [0] * (2 * phi - 1)
    for p in range(phi):
        if x[p]:
            for q in range(phi):
                raw[p + q] += x[p] * y[q]
    out = [0] * phi
    _reduce_into(raw, out, 0, phi, red)
    return out


def mul_binomial(a, n, phi, red, shift, z):
    """Multiply by ``1 - z*t**shift`` (``shift >= 1``), truncated to ``n``."""
    out = list(a[:n * phi])
    out.extend([0] * (n * phi - len(out)))
    # descending k so that out[k - shift] is still the input coefficient
    for k in range(n - 1, shift - 1, -1):
        src = (k - shift) * phi
        if not any(a[src:src + phi]):
            continue
        prod = mul_scalar(a[src:src + phi], z, phi, red)
        base = k * phi
        for p in range(phi):
            out[base + p] -= prod[p]
    return out


def inv_scaled(u, n, phi, red, den):
    """Scaled inverse of ``u/den`` where ``u[0] == den`` (as a rational).

    Returns integer buffer ``B`` with ``B_k = b_k * den**k`` where ``b`` is
    the inverse of ``u/den``.  All ``B_k`` are integral.
    """
    scaled = []
    power = 1
    for j in range(n):
        if j >= 1:
            scaled.append([c * power for c in u[j * phi:(j + 1) * phi]])
            power *= den
        else:
            scaled.append(None)
    out = [0] * (n * phi)
    if n == 0:
        return out
    out[0] = 1
    width = 2 * phi - 1
    for k in range(1, n):
        raw = [0] * width
        for j in range(1, k + 1):
            uj = scaled[j]
            if not any(uj):
                continue
            base = (k - j) * phi
            for p in range(phi):
                x = uj[p]
                if x:
                    for q in range(phi):
                        y = out[base + q]
                        if y:
                            raw[p + q] -= x * y
        _reduce_into(raw, out, k * phi, phi, red)
    return out
