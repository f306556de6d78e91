"""Pure-Python polynomial kernels.

Dense products are routed through a single big-integer multiplication
(Kronecker substitution): coefficients are packed into fixed-width byte
lanes, multiplied once with CPython's native bignum arithmetic, and
unpacked.  This keeps the fallback within a small factor of the compiled
kernels for the sizes the library uses.
"""


def _pack(coeffs, width):
    return int.from_bytes(
        b"".join(c.to_bytes(width, "little") for c in coeffs), "little"
    )


def _unpack(value, width, count):
    raw = value.to_bytes(width * count, "little")
    return [
        int.from_bytes(raw[i * width : (i + 1) * width], "little")
        for i in range(count)
    ]


def _lane_width(max_coeff, length):
    bound = max_coeff * max_coeff * length + 1
    return (bound.bit_length() + 7) // 8


def eisenstein_mul(a, b, e, p, pmod):
    """Product in (Z/pmod)[t]/(t^e - p); a, b dense lists of length e."""
    if e == 1:
        return [a[0] * b[0] % pmod]
    width = _lane_width(pmod - 1, e)
    conv = _unpack(_pack(a, width) * _pack(b, width), width, 2 * e - 1)
    out = conv[:e]
    for k in range(e, 2 * e - 1):
        out[k - e] += p * conv[k]
    return [c % pmod for c in out]


def window_mul(a, b, window, p):
    """Truncated product in F_p[t]/(t^window); inputs shorter than window."""
    la, lb = len(a), len(b)
    n = min(window, la + lb - 1) if la and lb else 0
    if n <= 0:
        return []
    width = _lane_width(p - 1, max(la, lb))
    cap = 1 << (8 * width * n)
    prod = (_pack(a, width) % cap) * (_pack(b, width) % cap) % cap
    return [c % p for c in _unpack(prod, width, n)]
