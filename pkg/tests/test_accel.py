import random

import numpy as np
import pytest

from jlogic import _accel


def rand_prog(rng, n, depth):
    if depth == 0 or rng.random() < 0.3:
        return [(_accel.PUSH_ATOM, rng.randrange(n))] if rng.random() < 0.9 else [(_accel.PUSH_FALSE, 0)]
    op = rng.choice((_accel.NOT, _accel.AND, _accel.OR, _accel.IMP, _accel.IFF))
    if op == _accel.NOT:
        return rand_prog(rng, n, depth - 1) + [(op, 0)]
    return rand_prog(rng, n, depth - 1) + rand_prog(rng, n, depth - 1) + [(op, 0)]


def naive_first_false(prog, n):
    for v in range(1 << n):
        st = []
        for op, arg in prog:
            if op == _accel.PUSH_ATOM:
                st.append(bool(v >> arg & 1))
            elif op == _accel.PUSH_FALSE:
                st.append(False)
            elif op == _accel.NOT:
                st.append(not st.pop())
            else:
                b, a = st.pop(), st.pop()
                st.append({_accel.AND: a and b, _accel.OR: a or b, _accel.IMP: (not a) or b,
                           _accel.IFF: a == b}[op])
        if not st[0]:
            return v
    return -1


@pytest.mark.parametrize("use_numba", [False, True])
def test_truth_table_paths_agree(use_numba):
    rng = random.Random(7)
    for _ in range(400):
        n = rng.randint(1, 9)
        p = rand_prog(rng, n, rng.randint(1, 5))
        assert _accel.first_falsifying(p, n, use_numba=use_numba) == naive_first_false(p, n)


def test_atom_limit():
    with pytest.raises(ValueError):
        _accel.first_falsifying([(0, 0)], _accel.MAX_ATOMS + 1)


def test_sixteen_atoms():
    n = 16
    prog = [(_accel.PUSH_ATOM, 15), (_accel.PUSH_ATOM, 15), (_accel.NOT, 0), (_accel.OR, 0)]
    assert _accel.first_falsifying(prog, n) == -1
    prog = [(_accel.PUSH_ATOM, 15)]
    assert _accel.first_falsifying(prog, n) == 0
    prog = [(_accel.PUSH_ATOM, 15), (_accel.NOT, 0)]
    assert _accel.first_falsifying(prog, n) == 1 << 15


@pytest.mark.parametrize("use_numba", [False, True])
def test_warshall(use_numba):
    rng = np.random.default_rng(1)
    for n in (1, 2, 5, 9):
        m = rng.random((n, n)) < 0.3
        want = m.copy()
        for _ in range(n):
            want = want | (want.astype(int) @ want.astype(int) > 0)
        assert (_accel.transitive_closure(m, use_numba=use_numba) == want).all()
