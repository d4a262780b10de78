"""Plain-text formats for tables, polynomials, affine maps and generic specs.

EvalTable::

    q n
    v_0 v_1 ... v_{q^n - 1}        (any whitespace layout)

MPoly, one term per line::

    coeff e_1 ... e_m

AffineMap::

    n ell
    n rows of ell codes (the matrix M)
    one row of n codes (the shift c)

Generic spec::

    field p^k
    t T
    block                 (followed by MPoly lines, closed by "end")
    exponents             (followed by rows of t exponents, closed by "end")

Blank lines and ``#`` comments are ignored everywhere.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .affine import AffineMap
from .errors import InvalidParameters, ShapeMismatch
from .gf import FieldSpec, parse_field
from .mpoly import EvalTable, MPoly


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _text(src) -> str:
    if isinstance(src, Path) or (isinstance(src, str) and src and "\n" not in src and Path(src).is_file()):
        return Path(src).read_text()
    return src


def parse_table(src, fs: FieldSpec | None = None) -> EvalTable:
    tokens = " ".join(_lines(_text(src))).split()
    if len(tokens) < 2:
        raise InvalidParameters("table needs a 'q n' header")
    q, n = int(tokens[0]), int(tokens[1])
    fs = fs or parse_field(str(q))
    if fs.q != q:
        raise InvalidParameters(f"table is over F_{q} but the field is F_{fs.q}")
    vals = np.array([int(v) for v in tokens[2:]], dtype=np.int64)
    if vals.size != q**n:
        raise ShapeMismatch(f"expected {q**n} values, found {vals.size}")
    return EvalTable(fs, n, vals)


def format_table(t: EvalTable, per_line: int | None = None) -> str:
    q = t.fs.q
    per_line = per_line or q
    vals = t.values.tolist()
    rows = [" ".join(map(str, vals[i:i + per_line])) for i in range(0, len(vals), per_line)]
    return f"{q} {t.m}\n" + "\n".join(rows) + "\n"


def parse_mpoly(src, fs: FieldSpec, m: int | None = None) -> MPoly:
    terms = {}
    for line in _lines(_text(src)):
        parts = [int(v) for v in line.split()]
        c, e = parts[0], tuple(parts[1:])
        if m is None:
            m = len(e)
        if len(e) != m:
            raise ShapeMismatch(f"term {line!r} has {len(e)} exponents, expected {m}")
        terms[e] = int(fs.add[terms.get(e, 0), c % fs.q])
    return MPoly(fs, m or 0, terms)


def format_mpoly(P: MPoly) -> str:
    return "".join(
        f"{c} {' '.join(map(str, e))}".rstrip() + "\n" for e, c in sorted(P.terms.items())
    )


def parse_affine(src, fs: FieldSpec) -> AffineMap:
    rows = [[int(v) for v in line.split()] for line in _lines(_text(src))]
    if not rows or len(rows[0]) != 2:
        raise InvalidParameters("affine map needs an 'n ell' header")
    n, ell = rows[0]
    body = rows[1:]
    if len(body) != n + 1 and not (ell == 0 and len(body) == 1):
        raise ShapeMismatch(f"expected {n} matrix rows and one shift row")
    M = np.array(body[:n] if ell else [[]] * n, dtype=np.int64).reshape(n, ell)
    c = np.array(body[-1], dtype=np.int64)
    return AffineMap(fs, M, c)


def format_affine(T: AffineMap) -> str:
    lines = [f"{T.n} {T.ell}"]
    lines += [" ".join(map(str, row)) for row in T.M.tolist()]
    lines.append(" ".join(map(str, T.c.tolist())))
    return "\n".join(lines) + "\n"


def parse_generic_spec(src):
    """Returns a :class:`~grm.generic.BlockProductSpec`."""
    from .generic import BlockProductSpec

    fs, t, blocks, exps = None, None, [], []
    mode, buf = None, []
    for line in _lines(_text(src)):
        word = line.split()[0]
        if mode is None:
            if word == "field":
                fs = parse_field(line.split()[1])
            elif word == "t":
                t = int(line.split()[1])
            elif word in ("block", "exponents"):
                if fs is None:
                    raise InvalidParameters("the field line must come first")
                mode, buf = word, []
            else:
                raise InvalidParameters(f"unexpected line {line!r}")
        elif word == "end":
            if mode == "block":
                blocks.append(parse_mpoly("\n".join(buf) + "\n", fs))
            else:
                exps.extend(buf)
            mode = None
        else:
            buf.append(line if mode == "block" else [int(v) for v in line.split()])
    if mode is not None:
        raise InvalidParameters(f"unterminated {mode} section")
    if fs is None or t is None:
        raise InvalidParameters("spec needs 'field' and 't' lines")
    E = np.array(exps, dtype=np.int64).reshape(-1, t)
    return BlockProductSpec(fs, blocks, t, E)


def format_generic_spec(spec) -> str:
    out = [f"field {spec.fs.name}", f"t {spec.t}"]
    for P in spec.blocks:
        out.append("block")
        out.append(format_mpoly(P).rstrip("\n"))
        out.append("end")
    out.append("exponents")
    out += [" ".join(map(str, row)) for row in np.asarray(spec.E).tolist()]
    out.append("end")
    return "\n".join(out) + "\n"
