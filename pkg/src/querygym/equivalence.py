"""Result-table comparison: Equivalent / Subset / Superset / Other.

Comparison ignores row order, column order, and column names: it searches for
a column bijection under which the deduplicated row sets coincide (or nest).
Numeric cells compare under a relative tolerance so SQLite and PostgreSQL
float formatting differences do not break parity.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .errors import TruncatedComparisonError
from .model import Cell, ResultTable, TableRelationKind

REL_TOLERANCE = 1e-6
INTEGRAL_TOLERANCE = 1e-9


def normalize_cell(v: Cell) -> Cell:
    if v is None:
        return None
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        if abs(v - round(v)) <= INTEGRAL_TOLERANCE:
            return int(round(v))
        return v
    if isinstance(v, str):
        return v.strip()
    return v


def cells_equal(a: Cell, b: Cell) -> bool:
    a = normalize_cell(a)
    b = normalize_cell(b)
    if a is None or b is None:
        return a is None and b is None
    a_num = isinstance(a, (int, float))
    b_num = isinstance(b, (int, float))
    if a_num and b_num:
        return abs(a - b) <= REL_TOLERANCE * max(1.0, abs(a), abs(b))
    if type(a) is not type(b):
        return False
    return a == b


def canonical_cell(v: Cell):
    """Hashable token consistent with cells_equal for set operations."""
    v = normalize_cell(v)
    if v is None:
        return ("n",)
    if isinstance(v, int):
        return ("i", v)
    if isinstance(v, float):
        # 7 significant digits approximates the 1e-6 relative tolerance.
        return ("r", f"{v:.6e}")
    if isinstance(v, bytes):
        return ("b", v)
    return ("t", v)


def canonical_rows(table: ResultTable) -> list[tuple]:
    return [tuple(canonical_cell(c) for c in row) for row in table.rows]


@dataclass(frozen=True)
class TableRelation:
    relation: TableRelationKind
    witness_alignment: Optional[tuple[int, ...]] = None  # current col -> target col

    @property
    def is_equivalent(self) -> bool:
        return self.relation == TableRelationKind.EQUIVALENT


def _rows_by_permutation(rows: list[tuple], perm: tuple[int, ...]) -> list[tuple]:
    return [tuple(row[i] for i in perm) for row in rows]


def _leaf_check(cur_rows, tgt_set, tgt_counter, perm, multiset: bool):
    """Relation of the permuted current rows against the target rows."""
    inv = [0] * len(perm)
    for cur_idx, tgt_idx in enumerate(perm):
        inv[tgt_idx] = cur_idx
    permuted = [tuple(row[i] for i in inv) for row in cur_rows]
    if multiset:
        cur_counter = Counter(permuted)
        if cur_counter == tgt_counter:
            return TableRelationKind.EQUIVALENT
        if all(tgt_counter[r] >= cnt for r, cnt in cur_counter.items()):
            return TableRelationKind.SUBSET
        if all(cur_counter[r] >= cnt for r, cnt in tgt_counter.items()):
            return TableRelationKind.SUPERSET
        return None
    cur_set = set(permuted)
    if cur_set == tgt_set:
        return TableRelationKind.EQUIVALENT
    if cur_set <= tgt_set:
        return TableRelationKind.SUBSET
    if cur_set >= tgt_set:
        return TableRelationKind.SUPERSET
    return None


def _search_bijection(cur_cols, tgt_cols, compatible, on_leaf):
    """DFS over column bijections; `compatible(i, j)` prunes impossible pairs."""
    n = len(cur_cols)
    used = [False] * n
    perm = [0] * n

    def dfs(i: int):
        if i == n:
            return on_leaf(tuple(perm))
        for j in range(n):
            if used[j] or not compatible(i, j):
                continue
            used[j] = True
            perm[i] = j
            result = dfs(i + 1)
            if result is not None:
                return result
            used[j] = False
        return None

    return dfs(0)


def align_and_compare(current: ResultTable, target: ResultTable,
                      multiset: bool = False) -> TableRelation:
    if current.truncated or target.truncated:
        raise TruncatedComparisonError(
            "cannot compare truncated result tables; raise the row cap")
    n_cur = len(current.columns)
    n_tgt = len(target.columns)
    if n_cur != n_tgt:
        return TableRelation(TableRelationKind.OTHER)

    cur_rows = canonical_rows(current)
    tgt_rows = canonical_rows(target)
    if not multiset:
        cur_rows = list(dict.fromkeys(cur_rows))
        tgt_rows = list(dict.fromkeys(tgt_rows))
    tgt_set = set(tgt_rows)
    tgt_counter = Counter(tgt_rows) if multiset else Counter()

    n = n_cur
    cur_col_vals = [[row[i] for row in cur_rows] for i in range(n)]
    tgt_col_vals = [[row[j] for row in tgt_rows] for j in range(n)]
    cur_fp = [tuple(sorted(v)) for v in cur_col_vals]
    tgt_fp = [tuple(sorted(v)) for v in tgt_col_vals]
    cur_sets = [set(v) for v in cur_col_vals]
    tgt_sets = [set(v) for v in tgt_col_vals]

    # Pass 1: exact equivalence, pruned by per-column value fingerprints.
    def eq_leaf(perm):
        rel = _leaf_check(cur_rows, tgt_set, tgt_counter, perm, multiset)
        return perm if rel == TableRelationKind.EQUIVALENT else None

    perm = _search_bijection(
        cur_col_vals, tgt_col_vals,
        lambda i, j: cur_fp[i] == tgt_fp[j], eq_leaf)
    if perm is not None:
        return TableRelation(TableRelationKind.EQUIVALENT, perm)

    # Pass 2: subset, pruned by per-column value-set containment.
    def sub_leaf(perm):
        rel = _leaf_check(cur_rows, tgt_set, tgt_counter, perm, multiset)
        return perm if rel == TableRelationKind.SUBSET else None

    perm = _search_bijection(
        cur_col_vals, tgt_col_vals,
        lambda i, j: cur_sets[i] <= tgt_sets[j], sub_leaf)
    if perm is not None:
        return TableRelation(TableRelationKind.SUBSET, perm)

    # Pass 3: superset.
    def sup_leaf(perm):
        rel = _leaf_check(cur_rows, tgt_set, tgt_counter, perm, multiset)
        return perm if rel == TableRelationKind.SUPERSET else None

    perm = _search_bijection(
        cur_col_vals, tgt_col_vals,
        lambda i, j: cur_sets[i] >= tgt_sets[j], sup_leaf)
    if perm is not None:
        return TableRelation(TableRelationKind.SUPERSET, perm)

    return TableRelation(TableRelationKind.OTHER)
