"""Hot loops: truth-table evaluation of a compiled propositional program and
Warshall transitive closure.  numba-compiled when available; set
``JLOGIC_NO_NUMBA=1`` to force the numpy versions."""

from __future__ import annotations

import os

import numpy as np

PUSH_ATOM, PUSH_FALSE, NOT, AND, OR, IMP, IFF = range(7)
MAX_ATOMS = 16

USE_NUMBA = os.environ.get("JLOGIC_NO_NUMBA", "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _first_false_py(prog: np.ndarray, n_atoms: int) -> int:
    """Vectorized over all valuations; returns the first falsifying valuation or -1."""
    size = 1 << n_atoms
    idx = np.arange(size, dtype=np.int64)
    stack = []
    for op, arg in prog:
        if op == PUSH_ATOM:
            stack.append(((idx >> arg) & 1).astype(bool))
        elif op == PUSH_FALSE:
            stack.append(np.zeros(size, dtype=bool))
        elif op == NOT:
            stack.append(~stack.pop())
        else:
            b = stack.pop()
            a = stack.pop()
            if op == AND:
                stack.append(a & b)
            elif op == OR:
                stack.append(a | b)
            elif op == IMP:
                stack.append(~a | b)
            else:
                stack.append(a == b)
    res = stack.pop()
    bad = np.flatnonzero(~res)
    return int(bad[0]) if bad.size else -1


def _warshall_py(m: np.ndarray) -> np.ndarray:
    r = np.array(m, dtype=bool, copy=True)
    for k in range(r.shape[0]):
        r |= r[:, k:k + 1] & r[k:k + 1, :]
    return r


if USE_NUMBA:

    # bit i of lane pattern k is bit k of valuation i, for the six low atoms
    _LANES = np.array([0xAAAAAAAAAAAAAAAA, 0xCCCCCCCCCCCCCCCC, 0xF0F0F0F0F0F0F0F0,
                       0xFF00FF00FF00FF00, 0xFFFF0000FFFF0000, 0xFFFFFFFF00000000], dtype=np.uint64)

    @njit(cache=True)
    def _first_false_nb(prog, n_atoms, lanes):
        # 64 valuations per machine word
        size = 1 << n_atoms
        width = min(size, 64)
        full = np.uint64(0xFFFFFFFFFFFFFFFF) if width == 64 else np.uint64((1 << width) - 1)
        zero = np.uint64(0)
        stack = np.zeros(prog.shape[0] + 1, dtype=np.uint64)
        for block in range(max(1, size >> 6)):
            sp = 0
            for i in range(prog.shape[0]):
                op = prog[i, 0]
                if op == 0:
                    a = prog[i, 1]
                    if a < 6:
                        stack[sp] = lanes[a]
                    elif (block >> (a - 6)) & 1:
                        stack[sp] = full
                    else:
                        stack[sp] = zero
                    sp += 1
                elif op == 1:
                    stack[sp] = zero
                    sp += 1
                elif op == 2:
                    stack[sp - 1] = ~stack[sp - 1]
                else:
                    b = stack[sp - 1]
                    a = stack[sp - 2]
                    sp -= 1
                    if op == 3:
                        stack[sp - 1] = a & b
                    elif op == 4:
                        stack[sp - 1] = a | b
                    elif op == 5:
                        stack[sp - 1] = ~a | b
                    else:
                        stack[sp - 1] = ~(a ^ b)
            bad = ~stack[0] & full
            if bad:
                k = 0
                while not (bad >> np.uint64(k)) & np.uint64(1):
                    k += 1
                return (block << 6) + k
        return -1

    @njit(cache=True)
    def _warshall_nb(m):
        n = m.shape[0]
        r = m.copy()
        for k in range(n):
            for i in range(n):
                if r[i, k]:
                    for j in range(n):
                        if r[k, j]:
                            r[i, j] = True
        return r


def first_falsifying(prog, n_atoms: int, use_numba: bool | None = None) -> int:
    """Index of the first valuation (bit i = atom i) making ``prog`` false, -1 if none."""
    if n_atoms > MAX_ATOMS:
        raise ValueError(f"{n_atoms} atoms exceeds the limit of {MAX_ATOMS}")
    prog = np.asarray(prog, dtype=np.int64).reshape(-1, 2)
    if (USE_NUMBA if use_numba is None else use_numba and USE_NUMBA):
        return int(_first_false_nb(prog, n_atoms, _LANES))
    return _first_false_py(prog, n_atoms)


def transitive_closure(m, use_numba: bool | None = None) -> np.ndarray:
    m = np.asarray(m, dtype=bool)
    if (USE_NUMBA if use_numba is None else use_numba and USE_NUMBA):
        return _warshall_nb(np.ascontiguousarray(m))
    return _warshall_py(m)
