"""Minimum-weight recovery for CSS codes and the final logical verdict.

X and Z errors are decoded independently, as the CSS structure allows:
X-type corrections are keyed by the Z-sector syndrome bits and Z-type
corrections by the X-sector bits. Tables enumerate pure-type errors in
increasing weight with first-writer-wins, so every stored entry is a
minimum-weight representative for its syndrome. Syndromes beyond the
enumerated weight fall back to an any-solution GF(2) solve; those only
arise past the fault budget, where no fault-tolerance guarantee applies.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass

from .stabilizer import PauliOperator, StabilizerCode, logical_class, multiply, syndrome_of

DEFAULT_BUDGET = 2_000_000

_MAGIC = b"FTSY"
_VERSION = 1


def _sector_columns(code: StabilizerCode, sector: tuple[int, ...]) -> list[int]:
    """Column q = packed sector-local syndrome of a single-qubit opposite-type error."""
    cols = [0] * code.n
    for local, gi in enumerate(sector):
        g = code.generators[gi]
        support = g.x_bits | g.z_bits
        for q in range(code.n):
            if (support >> q) & 1:
                cols[q] |= 1 << local
    return cols


class _Gf2Solver:
    """Any-solution solver for sector syndromes, from reduced row echelon form."""

    def __init__(self, cols: list[int], n: int, m: int):
        # rows of H: generator i has row = set of qubits in its support
        rows = [0] * m
        for q in range(n):
            col = cols[q]
            for i in range(m):
                if (col >> i) & 1:
                    rows[i] |= 1 << q
        pivots: list[tuple[int, int]] = []
        work = [(rows[i], 1 << i) for i in range(m)]
        for idx in range(m):
            mask, sel = work[idx]
            for col, (pmask, psel) in pivots:
                if (mask >> col) & 1:
                    mask ^= pmask
                    sel ^= psel
            if mask == 0:
                continue
            col = mask.bit_length() - 1
            # reduce earlier pivot rows so each pivot column stays unique
            pivots = [
                (c, (pm ^ mask, ps ^ sel)) if (pm >> col) & 1 else (c, (pm, ps))
                for c, (pm, ps) in pivots
            ]
            pivots.append((col, (mask, sel)))
        self.pivots = [(col, sel) for col, (mask, sel) in pivots]
        self.rank = len(self.pivots)
        self.m = m

    def solve(self, syndrome: int) -> int:
        x = 0
        for col, sel in self.pivots:
            if (sel & syndrome).bit_count() & 1:
                x |= 1 << col
        return x


@dataclass
class SyndromeTable:
    """Per-sector minimum-weight lookup plus the GF(2) fallback solvers."""

    code: StabilizerCode
    built_to_weight: int
    x_corrections: dict[int, int]  # Z-sector syndrome -> X error mask
    z_corrections: dict[int, int]  # X-sector syndrome -> Z error mask
    _x_solver: _Gf2Solver
    _z_solver: _Gf2Solver
    fallback_decodes: int = 0


def enumeration_count(n: int, max_weight: int) -> int:
    total = 0
    for w in range(max_weight + 1):
        c = 1
        for i in range(w):
            c = c * (n - i) // (i + 1)
        total += c
    return total


def build_table(
    code: StabilizerCode, max_weight: int, budget: int = DEFAULT_BUDGET
) -> SyndromeTable:
    """Enumerate pure-type errors by increasing weight, first writer wins."""
    if not code.css:
        raise ValueError("lookup decoding is implemented for CSS codes only")
    required = enumeration_count(code.n, max_weight)
    if required > budget:
        raise ValueError(
            f"table enumeration needs {required} supports per sector, "
            f"budget is {budget}; lower max_weight or raise the budget"
        )
    cols_z = _sector_columns(code, code.z_sector)  # detect X errors
    cols_x = _sector_columns(code, code.x_sector)  # detect Z errors
    x_corrections: dict[int, int] = {0: 0}
    z_corrections: dict[int, int] = {0: 0}
    for w in range(1, max_weight + 1):
        for support in itertools.combinations(range(code.n), w):
            mask = 0
            syn_x_err = 0
            syn_z_err = 0
            for q in support:
                mask |= 1 << q
                syn_x_err ^= cols_z[q]
                syn_z_err ^= cols_x[q]
            if syn_x_err not in x_corrections:
                x_corrections[syn_x_err] = mask
            if syn_z_err not in z_corrections:
                z_corrections[syn_z_err] = mask
    return SyndromeTable(
        code=code,
        built_to_weight=max_weight,
        x_corrections=x_corrections,
        z_corrections=z_corrections,
        _x_solver=_Gf2Solver(cols_z, code.n, len(code.z_sector)),
        _z_solver=_Gf2Solver(cols_x, code.n, len(code.x_sector)),
    )


def split_sectors(code: StabilizerCode, syndrome: int) -> tuple[int, int]:
    """(X-sector bits, Z-sector bits) of a packed full syndrome."""
    x_part = z_part = 0
    for local, gi in enumerate(code.x_sector):
        x_part |= ((syndrome >> gi) & 1) << local
    for local, gi in enumerate(code.z_sector):
        z_part |= ((syndrome >> gi) & 1) << local
    return x_part, z_part


def decode_sector_masks(table: SyndromeTable, x_part: int, z_part: int) -> tuple[int, int]:
    """(x_mask, z_mask) correction for the two sector syndromes."""
    x_mask = table.x_corrections.get(z_part)
    if x_mask is None:
        table.fallback_decodes += 1
        x_mask = table._x_solver.solve(z_part)
    z_mask = table.z_corrections.get(x_part)
    if z_mask is None:
        table.fallback_decodes += 1
        z_mask = table._z_solver.solve(x_part)
    return x_mask, z_mask


def decode(table: SyndromeTable, code: StabilizerCode, syndrome: int) -> PauliOperator:
    """A Pauli whose syndrome equals the input, minimum weight when covered."""
    x_part, z_part = split_sectors(code, syndrome)
    x_mask, z_mask = decode_sector_masks(table, x_part, z_part)
    result = PauliOperator(code.n, x_mask, z_mask)
    check = syndrome_of(code, result)
    if check != syndrome:
        raise RuntimeError(
            f"decoder produced syndrome {check:#x} for requested {syndrome:#x}"
        )
    return result


def final_verdict(
    code: StabilizerCode, table: SyndromeTable, frame_after_recovery: PauliOperator
) -> str:
    """Ideal error correction followed by the logical classification."""
    ideal = decode(table, code, syndrome_of(code, frame_after_recovery))
    residual = multiply(frame_after_recovery, ideal)
    if logical_class(code, residual) == "logical":
        return "logical_error"
    return "no_logical_error"


# ---------------------------------------------------------------------------
# Cache file: magic, version, n, d, max_weight, then per sector a tag byte,
# an entry count, and (syndrome, pauli mask) u64 pairs. Everything is
# little-endian and therefore bit-exact across platforms.


def save_table(table: SyndromeTable, path) -> None:
    code = table.code
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HIII", _VERSION, code.n, code.distance, table.built_to_weight))
        for tag, entries in ((b"X", table.x_corrections), (b"Z", table.z_corrections)):
            fh.write(tag)
            fh.write(struct.pack("<Q", len(entries)))
            for syn in sorted(entries):
                fh.write(struct.pack("<QQ", syn, entries[syn]))


def load_table(path, code: StabilizerCode) -> SyndromeTable:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a syndrome table cache")
        version, n, d, max_weight = struct.unpack("<HIII", fh.read(14))
        if version != _VERSION:
            raise ValueError(f"unsupported cache version {version}")
        if n != code.n or d != code.distance:
            raise ValueError(
                f"cache is for n={n}, d={d}; code has n={code.n}, d={code.distance}"
            )
        sectors = {}
        for _ in range(2):
            tag = fh.read(1)
            (count,) = struct.unpack("<Q", fh.read(8))
            entries = {}
            for _ in range(count):
                syn, mask = struct.unpack("<QQ", fh.read(16))
                entries[syn] = mask
            sectors[tag] = entries
    cols_z = _sector_columns(code, code.z_sector)
    cols_x = _sector_columns(code, code.x_sector)
    return SyndromeTable(
        code=code,
        built_to_weight=max_weight,
        x_corrections=sectors[b"X"],
        z_corrections=sectors[b"Z"],
        _x_solver=_Gf2Solver(cols_z, code.n, len(code.z_sector)),
        _z_solver=_Gf2Solver(cols_x, code.n, len(code.x_sector)),
    )
