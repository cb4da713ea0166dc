"""Canonical text rendering in the system-definition grammar."""

from __future__ import annotations

from .gaussian import format_gr


def _monomial(k: int) -> str:
    if k == 0:
        return ""
    if k == 1:
        return "z"
    return f"z^{k}"


def _term(c, k: int):
    """Return (negative, body) for coefficient c times z^k."""
    mono = _monomial(k)
    if c.is_real() or not c.re:
        negative = (c.re < 0) if c.is_real() else (c.im < 0)
        body = format_gr(-c if negative else c)
        if mono:
            if body == "1":
                body = mono
            else:
                body = f"{body}*{mono}"
        return negative, body
    body = format_gr(c)  # already parenthesised
    return False, f"{body}*{mono}" if mono else body


def format_poly(p) -> str:
    if not p.coeffs:
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        negative, body = _term(c, k)
        if not parts:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f" - {body}" if negative else f" + {body}")
    return "".join(parts)


def _is_atom(p) -> bool:
    nonzero = [c for c in p.coeffs if c]
    return len(nonzero) == 1 and (nonzero[0].is_real() or not nonzero[0].re)


def format_ratfunc(f) -> str:
    num = format_poly(f.num)
    if f.den.is_const():
        return num
    if not _is_atom(f.num) or "/" in num:
        num = f"({num})"
    den = format_poly(f.den)
    if not _is_atom(f.den) or "*" in den:
        den = f"({den})"
    return f"{num}/{den}"


def format_matrix(m, multiline: bool = True) -> str:
    rows = ["[" + ", ".join(format_ratfunc(e) for e in row) + "]" for row in m.entries]
    if multiline:
        return "[" + ",\n ".join(rows) + "]"
    return "[" + ", ".join(rows) + "]"
