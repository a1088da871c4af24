"""Plain-text serialization of MRF models.

Layout::

    n L PRIOR_KIND [params...]
    <n lines, L unary costs each>
    p q gamma        (one line per edge)

Blank lines and ``#`` comments are ignored. Floats are written with ``repr``
so a write/read round trip is lossless.
"""

from __future__ import annotations

import numpy as np

from irgc.mrf_model import MRFModel
from irgc.priors import INFLECTION_KINDS, PriorKind, PriorSpec, decompose


class ModelFormatError(ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _content_lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def _floats(number, fields):
    try:
        return [float(f) for f in fields]
    except ValueError:
        raise ModelFormatError(number, f"expected numbers, got {' '.join(fields)!r}") from None


def parse_model(text):
    lines = list(_content_lines(text))
    if not lines:
        raise ModelFormatError(1, "empty model file")
    number, header = lines[0]
    if len(header) < 3:
        raise ModelFormatError(number, "header must read 'n L PRIOR_KIND [params...]'")
    try:
        n, L = int(header[0]), int(header[1])
    except ValueError:
        raise ModelFormatError(number, "node and label counts must be integers") from None
    if n < 1 or L < 2:
        raise ModelFormatError(number, "need n >= 1 and L >= 2")
    try:
        kind = PriorKind(header[2].upper())
    except ValueError:
        raise ModelFormatError(number, f"unknown prior kind {header[2]!r}") from None
    params = _floats(number, header[3:])
    try:
        if kind in INFLECTION_KINDS:
            spec = PriorSpec(kind, lam=params[0] if params else None)
        elif kind is PriorKind.CORRUPTED_GAUSSIAN:
            if len(params) != 2:
                raise ValueError("corrupted Gaussian needs alpha and beta")
            spec = PriorSpec(kind, alpha=params[0], beta=params[1])
        else:
            spec = PriorSpec(kind)
        prior = decompose(spec)
    except ValueError as exc:
        raise ModelFormatError(number, str(exc)) from None

    if len(lines) < 1 + n:
        last = lines[-1][0]
        raise ModelFormatError(last, f"expected {n} unary rows, found {len(lines) - 1}")
    unary = np.empty((n, L))
    for row, (number, fields) in enumerate(lines[1 : 1 + n]):
        if len(fields) != L:
            raise ModelFormatError(number, f"unary row has {len(fields)} values, expected {L}")
        unary[row] = _floats(number, fields)

    edges, gamma = [], []
    for number, fields in lines[1 + n :]:
        if len(fields) != 3:
            raise ModelFormatError(number, "edge line must read 'p q gamma'")
        try:
            p, q = int(fields[0]), int(fields[1])
        except ValueError:
            raise ModelFormatError(number, "edge endpoints must be integers") from None
        (g,) = _floats(number, fields[2:])
        if not (0 <= p < n and 0 <= q < n):
            raise ModelFormatError(number, f"edge ({p}, {q}) references a node outside 0..{n - 1}")
        if p == q:
            raise ModelFormatError(number, "edge endpoints must differ")
        if not g >= 0:
            raise ModelFormatError(number, "gamma must be non-negative")
        edges.append((p, q))
        gamma.append(g)
    return MRFModel(unary, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(gamma), prior)


def read_model(path):
    with open(path) as fh:
        return parse_model(fh.read())


def format_model(model):
    spec = model.prior.spec
    header = [str(model.node_count), str(model.label_count), spec.kind.value]
    header += [repr(float(v)) if not isinstance(v, int) else str(v) for v in spec.params()]
    out = [" ".join(header)]
    out += [" ".join(repr(float(v)) for v in row) for row in model.unary]
    out += [f"{int(p)} {int(q)} {float(g)!r}" for (p, q), g in zip(model.edges, model.gamma)]
    return "\n".join(out) + "\n"


def write_model(model, path):
    with open(path, "w") as fh:
        fh.write(format_model(model))
