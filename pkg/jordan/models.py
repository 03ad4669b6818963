from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

NONNEG = "nonneg"
SOC = "soc"
PSD = "psd"

BLOCK_KINDS = [NONNEG, SOC, PSD]

ABS_TOL = 1e-12


class ConeSpecError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise ConeSpecError(f"unknown block kind '{self.kind}'")
        if self.dim < 0 or (self.kind != NONNEG and self.dim < 1):
            raise ConeSpecError(f"invalid dimension {self.dim} for {self.kind} block")

    @property
    def ambient_dim(self) -> int:
        if self.kind == PSD:
            return self.dim * (self.dim + 1) // 2
        return self.dim

    @property
    def rank(self) -> int:
        if self.kind == SOC:
            return 2
        return self.dim

    def to_dict(self) -> Dict:
        if self.kind == PSD:
            return {"kind": PSD, "order": self.dim}
        return {"kind": self.kind, "dim": self.dim}


def nonneg(dim: int) -> Block:
    return Block(NONNEG, dim)


def second_order(dim: int) -> Block:
    return Block(SOC, dim)


def psd(order: int) -> Block:
    return Block(PSD, order)


def _normalize(block: Block) -> Block:
    # L^1 is the half-line
    if block.kind == SOC and block.dim == 1:
        return Block(NONNEG, 1)
    return block


@dataclass(frozen=True)
class ConeSpec:
    """Ordered direct product of nonnegative, second-order and svec-PSD blocks.

    Coordinates are numbered globally in block order; inside a PSD block the
    svec order is column-major over the upper triangle, so entry (i, j) with
    i <= j sits at offset j(j+1)/2 + i (0-based).
    """

    blocks: Tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(_normalize(b) for b in self.blocks))

    @classmethod
    def of(cls, *blocks: Block) -> "ConeSpec":
        return cls(tuple(blocks))

    @classmethod
    def from_dict(cls, data: Dict) -> "ConeSpec":
        if not isinstance(data, dict) or not isinstance(data.get("blocks"), list):
            raise ConeSpecError("cone spec must be an object with a 'blocks' list")
        blocks = []
        for entry in data["blocks"]:
            kind = entry.get("kind")
            if kind == PSD:
                size = entry.get("order", entry.get("dim"))
            else:
                size = entry.get("dim")
            if not isinstance(size, int):
                raise ConeSpecError(f"block {entry} has no integer size")
            blocks.append(Block(kind, size))
        return cls(tuple(blocks))

    def to_dict(self) -> Dict:
        return {"blocks": [b.to_dict() for b in self.blocks]}

    @property
    def ambient_dim(self) -> int:
        return sum(b.ambient_dim for b in self.blocks)

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    @property
    def offsets(self) -> List[int]:
        out, pos = [], 0
        for b in self.blocks:
            out.append(pos)
            pos += b.ambient_dim
        return out

    def block_slice(self, h: int) -> slice:
        start = self.offsets[h]
        return slice(start, start + self.blocks[h].ambient_dim)

    def block_indices(self, h: int) -> List[int]:
        s = self.block_slice(h)
        return list(range(s.start, s.stop))

    def blocks_of(self, kind: str) -> List[int]:
        return [h for h, b in enumerate(self.blocks) if b.kind == kind and b.ambient_dim > 0]

    @property
    def has_psd(self) -> bool:
        return bool(self.blocks_of(PSD))

    def nonneg_indices(self) -> List[int]:
        out = []
        for h in self.blocks_of(NONNEG):
            out.extend(self.block_indices(h))
        return out

    def soc_leading(self, h: int) -> int:
        return self.offsets[h]

    def soc_tail(self, h: int) -> List[int]:
        return self.block_indices(h)[1:]

    def psd_index(self, h: int, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return self.offsets[h] + j * (j + 1) // 2 + i

    def nonneg_index_set(self) -> List[int]:
        """Coordinates whose value is nonnegative on the whole cone."""
        out = []
        for h, b in enumerate(self.blocks):
            if b.ambient_dim == 0:
                continue
            if b.kind == NONNEG:
                out.extend(self.block_indices(h))
            elif b.kind == SOC:
                out.append(self.soc_leading(h))
            else:
                out.extend(self.psd_index(h, i, i) for i in range(b.dim))
        return sorted(out)

    def check(self, x, name: str = "vector") -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"{name} has shape {arr.shape}, expected ({self.ambient_dim},)"
            )
        return arr

    def check_matrix(self, X, name: str = "matrix") -> np.ndarray:
        arr = np.asarray(X, dtype=float)
        n = self.ambient_dim
        if arr.shape != (n, n):
            raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n}, {n})")
        return arr


@dataclass
class SpectralDecomposition:
    eigenvalues: List[float] = field(default_factory=list)
    idempotents: List[np.ndarray] = field(default_factory=list)
    block_of: List[int] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        if not self.idempotents:
            return np.zeros(0)
        return sum(lam * c for lam, c in zip(self.eigenvalues, self.idempotents))


@dataclass
class QuadFormTable:
    forms: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.forms)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.forms[index]

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([x @ Q @ x for Q in self.forms])
