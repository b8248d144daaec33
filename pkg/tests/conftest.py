import numpy as np
import pytest

from sparseiqc.model import Network, StateSpace, Subsystem, UncertaintySpec


def first_order(pole, gain):
    """G(s) = gain / (s - pole) as a state-space block."""
    return StateSpace([[pole]], [[1.0]], [[gain]], [[0.0]])


def static(d):
    return StateSpace.from_gain(d)


def siso_subsystem(g_pq, g_pw=None, g_zq=None, g_zw=None):
    """SISO subsystem; omitted channel blocks default to zero gains."""
    m = 0 if (g_pw is None and g_zw is None and g_zq is None) else 1
    l = m
    g_pw = g_pw if g_pw is not None else StateSpace.zeros(1, m)
    g_zq = g_zq if g_zq is not None else StateSpace.zeros(l, 1)
    g_zw = g_zw if g_zw is not None else StateSpace.zeros(l, m)
    return Subsystem(g_pq, g_pw, g_zq, g_zw, UncertaintySpec("normalized_scalar_gain", 1))


def isolated_network(g_pq):
    """Single subsystem with no interconnection channels."""
    sub = siso_subsystem(g_pq)
    return Network([sub], (0, 0, []))


def random_stable_statespace(rng, n_states, n_outputs, n_inputs, margin=0.2):
    a = rng.standard_normal((n_states, n_states))
    if n_states:
        shift = float(np.max(np.linalg.eigvals(a).real)) + margin
        a = a - shift * np.eye(n_states)
    b = rng.standard_normal((n_states, n_inputs))
    c = rng.standard_normal((n_outputs, n_states))
    d = 0.1 * rng.standard_normal((n_outputs, n_inputs))
    return StateSpace(a, b, c, d)


def random_coupled_network(rng, n_subsystems, extra_edges=0, gain=0.5, state_dim=2):
    """Random connected network with one scalar channel per coupling edge.

    Subsystem gains are scaled by ``gain``; small values give networks
    that are robustly stable with margin, large values destabilize.
    """
    edges = [(i, i + 1) for i in range(n_subsystems - 1)]
    attempts = 0
    while extra_edges > 0 and attempts < 50 * extra_edges:
        attempts += 1
        i, j = sorted(rng.choice(n_subsystems, size=2, replace=False))
        if (i, j) not in edges:
            edges.append((int(i), int(j)))
            extra_edges -= 1
    # channel slots per subsystem, one per incident edge
    degree = [0] * n_subsystems
    slots = []
    for i, j in edges:
        slots.append((degree[i], degree[j]))
        degree[i] += 1
        degree[j] += 1
    subs = []
    for i in range(n_subsystems):
        m = max(degree[i], 0)
        blk = random_stable_statespace(rng, state_dim, 1 + m, 1 + m)
        d_scaled = gain * blk.d
        c_scaled = gain * blk.c
        full = StateSpace(blk.a, blk.b, c_scaled, d_scaled)
        g_pq = _take(full, [0], [0])
        g_pw = _take(full, [0], list(range(1, 1 + m)))
        g_zq = _take(full, list(range(1, 1 + m)), [0])
        g_zw = _take(full, list(range(1, 1 + m)), list(range(1, 1 + m)))
        subs.append(
            Subsystem(g_pq, g_pw, g_zq, g_zw, UncertaintySpec("normalized_scalar_gain", 1))
        )
    net_sizes_w = [s.m for s in subs]
    w_off = np.cumsum([0] + net_sizes_w)
    z_off = w_off  # m_i == l_i by construction
    entries = []
    for (i, j), (si, sj) in zip(edges, slots):
        entries.append((int(w_off[i] + si), int(z_off[j] + sj)))
        entries.append((int(w_off[j] + sj), int(z_off[i] + si)))
    rows = int(w_off[-1])
    return Network(subs, (rows, rows, entries))


def _take(ss, out_rows, in_cols):
    b = ss.b[:, in_cols] if len(in_cols) else np.zeros((ss.n_states, 0))
    c = ss.c[out_rows, :] if len(out_rows) else np.zeros((0, ss.n_states))
    d = ss.d[np.ix_(out_rows, in_cols)] if (len(out_rows) and len(in_cols)) else np.zeros(
        (len(out_rows), len(in_cols))
    )
    return StateSpace(ss.a, b, c, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
