"""
Problem interchange: a JSON layout for both program forms and an SDPA sparse
(.dat-s) reader/writer for LMI programs built from PSD and diagonal blocks.

JSON layout::

    {"form": "standard", "cone": {...}, "c": [...], "b": [...], "free_dim": 0,
     "A": {"shape": [m, n], "rows": [...], "cols": [...], "vals": [...]}}

    {"form": "lmi", "cone": {...}, "f0": [...], "f": [...],
     "F": {sparse}, "G": {sparse} | null, "h": [...] | null}
"""

import json
from typing import Dict, Union

import numpy as np
import scipy.sparse as sp
import yaml

from conicsolver.models import BlockConicProgram, LmiProgram, SolverError
from jordan.algebra import SQRT2
from jordan.models import NONNEG, PSD, ConeSpec, nonneg, psd


def _sparse_to_dict(M) -> Dict:
    coo = sp.coo_matrix(M)
    return {
        "shape": list(coo.shape),
        "rows": coo.row.tolist(),
        "cols": coo.col.tolist(),
        "vals": coo.data.tolist(),
    }


def _sparse_from_dict(data: Dict) -> sp.csr_matrix:
    return sp.csr_matrix(
        (data["vals"], (data["rows"], data["cols"])), shape=tuple(data["shape"])
    )


def program_to_dict(prog: Union[BlockConicProgram, LmiProgram]) -> Dict:
    if isinstance(prog, LmiProgram):
        return {
            "form": "lmi",
            "name": prog.name,
            "cone": prog.cone.to_dict(),
            "f0": np.asarray(prog.f0, dtype=float).tolist(),
            "f": np.asarray(prog.f, dtype=float).tolist(),
            "F": _sparse_to_dict(prog.F),
            "G": _sparse_to_dict(prog.G) if prog.G is not None else None,
            "h": np.asarray(prog.h, dtype=float).tolist() if prog.h is not None else None,
        }
    return {
        "form": "standard",
        "name": prog.name,
        "cone": prog.cone.to_dict(),
        "c": np.asarray(prog.c, dtype=float).tolist(),
        "b": np.asarray(prog.b, dtype=float).tolist(),
        "free_dim": prog.free_dim,
        "A": _sparse_to_dict(prog.A),
    }


def program_from_dict(data: Dict) -> Union[BlockConicProgram, LmiProgram]:
    try:
        cone = ConeSpec.from_dict(data["cone"])
        if data.get("form", "standard") == "lmi":
            G = _sparse_from_dict(data["G"]) if data.get("G") else None
            return LmiProgram(
                cone=cone,
                f0=np.asarray(data["f0"], dtype=float),
                F=_sparse_from_dict(data["F"]),
                f=np.asarray(data["f"], dtype=float),
                G=G,
                h=np.asarray(data["h"], dtype=float) if G is not None else None,
                name=data.get("name", ""),
            )
        return BlockConicProgram(
            cone=cone,
            c=np.asarray(data["c"], dtype=float),
            A=_sparse_from_dict(data["A"]),
            b=np.asarray(data["b"], dtype=float),
            free_dim=int(data.get("free_dim", 0)),
            name=data.get("name", ""),
        )
    except KeyError as exc:
        raise SolverError(f"program file is missing field {exc}")


def write_program(prog, path: str):
    with open(path, "w") as fh:
        json.dump(program_to_dict(prog), fh)


def read_program(path: str):
    if path.endswith(".dat-s"):
        with open(path) as fh:
            return read_sdpa(fh.read())
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise SolverError(f"{path}: failed to parse program: {exc}")
    return program_from_dict(data)


def _svec_positions(cone: ConeSpec):
    """Map each global coordinate to (block number, row, col, svec scale)."""
    out = []
    for h, block in enumerate(cone.blocks):
        if block.kind == PSD:
            for j in range(block.dim):
                for i in range(j + 1):
                    out.append((h + 1, i + 1, j + 1, 1.0 if i == j else SQRT2))
        elif block.kind == NONNEG:
            out.extend((h + 1, i + 1, i + 1, 1.0) for i in range(block.dim))
        else:
            raise SolverError("SDPA format supports PSD and diagonal blocks only")
    return out


def write_sdpa(prog: LmiProgram) -> str:
    if prog.G is not None and np.asarray(prog.h).size:
        raise SolverError("SDPA format has no equality block; eliminate G first")
    positions = _svec_positions(prog.cone)
    sizes = [b.dim if b.kind == PSD else -b.dim for b in prog.cone.blocks]
    lines = [
        f'"{prog.name or "gdnn"}"',
        str(prog.n_vars),
        str(len(sizes)),
        " ".join(str(s) for s in sizes),
        " ".join(repr(float(v)) for v in np.asarray(prog.f, dtype=float)),
    ]
    f0 = np.asarray(prog.f0, dtype=float)
    for k in np.flatnonzero(f0):
        blk, i, j, scale = positions[k]
        lines.append(f"0 {blk} {i} {j} {float(-f0[k] / scale)!r}")
    F = sp.coo_matrix(prog.F)
    for k, col, val in sorted(zip(F.row, F.col, F.data), key=lambda t: (t[1], t[0])):
        blk, i, j, scale = positions[k]
        lines.append(f"{col + 1} {blk} {i} {j} {float(val / scale)!r}")
    return "\n".join(lines) + "\n"


def read_sdpa(text: str) -> LmiProgram:
    tokens = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in "\"*":
            continue
        tokens.append(line.replace(",", " ").replace("{", " ").replace("}", " ").split())
    m = int(tokens[0][0])
    n_blocks = int(tokens[1][0])
    sizes = [int(float(s)) for s in tokens[2][:n_blocks]]
    f = np.array([float(v) for v in tokens[3][:m]])
    cone = ConeSpec(tuple(psd(s) if s > 0 else nonneg(-s) for s in sizes))
    index = {}
    for pos, (blk, i, j, scale) in enumerate(_svec_positions(cone)):
        index[(blk, i, j)] = (pos, scale)
    f0 = np.zeros(cone.ambient_dim)
    rows, cols, vals = [], [], []
    for entry in tokens[4:]:
        mat, blk, i, j = (int(v) for v in entry[:4])
        value = float(entry[4])
        if i > j:
            i, j = j, i
        pos, scale = index[(blk, i, j)]
        if mat == 0:
            f0[pos] = -value * scale
        else:
            rows.append(pos)
            cols.append(mat - 1)
            vals.append(value * scale)
    F = sp.csr_matrix((vals, (rows, cols)), shape=(cone.ambient_dim, m))
    return LmiProgram(cone=cone, f0=f0, F=F, f=f)
