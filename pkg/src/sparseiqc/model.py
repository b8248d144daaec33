"""Subsystems, interconnections, and closed-loop ground truth.

A network stacks per-subsystem transfer blocks (each a state-space
realization) and routes stacked outputs ``z`` to stacked inputs ``w``
through a sparse 0-1 interconnection matrix.  The module provides
frequency evaluation, well-posedness checking, the lumped transfer
matrix obtained by eliminating the interconnection, the augmented
description that moves the interconnection into an uncertainty channel,
and a brute-force closed-loop stability scan used as an independent
oracle by the test suite.

All types are immutable after construction and all operations are pure,
so per-frequency evaluations can safely run concurrently.
"""

import itertools
import json
import math

import numpy as np

from . import numerics
from .errors import DimensionError, EvaluationError, WellPosednessError

INF = math.inf

UNCERTAINTY_KINDS = ("normalized_scalar_gain", "identity")


def _freeze(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype)
    if arr.ndim != 2:
        raise DimensionError("expected a 2-d array, got shape %s" % (arr.shape,))
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf entries")
    arr.setflags(write=False)
    return arr


class StateSpace:
    """Real state-space realization ``(A, B, C, D)`` of a transfer matrix.

    ``stable=True`` (the default) asserts that ``A`` is Hurwitz, which is
    what membership in RH-infinity requires for every transfer block of a
    subsystem.
    """

    def __init__(self, a, b, c, d, stable=True):
        self.a = _freeze(a)
        self.b = _freeze(b)
        self.c = _freeze(c)
        self.d = _freeze(d)
        n = self.a.shape[0]
        if self.a.shape[1] != n:
            raise DimensionError("A must be square, got %s" % (self.a.shape,))
        if self.b.shape[0] != n:
            raise DimensionError("B has %d rows, expected %d" % (self.b.shape[0], n))
        if self.c.shape[1] != n:
            raise DimensionError("C has %d cols, expected %d" % (self.c.shape[1], n))
        if self.d.shape != (self.c.shape[0], self.b.shape[1]):
            raise DimensionError(
                "D has shape %s, expected %s"
                % (self.d.shape, (self.c.shape[0], self.b.shape[1]))
            )
        self.stable = bool(stable)
        if self.stable and n:
            # oracle-side check; the analysis path never consumes eigvals
            poles = np.linalg.eigvals(self.a)
            if np.max(poles.real) >= 0.0:
                raise ValueError(
                    "A is not Hurwitz (max real part %g) but stable=True"
                    % float(np.max(poles.real))
                )

    @property
    def n_states(self):
        return self.a.shape[0]

    @property
    def n_inputs(self):
        return self.b.shape[1]

    @property
    def n_outputs(self):
        return self.c.shape[0]

    @classmethod
    def from_gain(cls, d):
        """Static (memoryless) block with transfer matrix ``D``."""
        d = np.atleast_2d(np.asarray(d, dtype=np.float64))
        n_out, n_in = d.shape
        return cls(
            np.zeros((0, 0)), np.zeros((0, n_in)), np.zeros((n_out, 0)), d
        )

    @classmethod
    def zeros(cls, n_outputs, n_inputs):
        return cls.from_gain(np.zeros((n_outputs, n_inputs)))

    def __repr__(self):
        return "StateSpace(n=%d, inputs=%d, outputs=%d)" % (
            self.n_states,
            self.n_inputs,
            self.n_outputs,
        )


def eval_frequency(ss, omega):
    """Frequency response ``C (jw I - A)^{-1} B + D``; ``D`` at ``omega=inf``."""
    if omega != INF and (omega < 0 or not math.isfinite(omega)):
        raise ValueError("omega must be a nonnegative real or INF")
    if omega == INF or ss.n_states == 0:
        return ss.d.astype(np.complex128)
    m = 1j * omega * np.eye(ss.n_states) - ss.a
    try:
        x = numerics.solve_dense(m, ss.b.astype(np.complex128))
    except Exception as exc:
        raise EvaluationError(
            "frequency response evaluation failed at omega=%g: %s" % (omega, exc),
            omega=omega,
        ) from exc
    return ss.c @ x + ss.d


class UncertaintySpec:
    """Uncertainty channel description.

    ``normalized_scalar_gain``: one unknown constant gain in [-1, 1]
    applied entrywise (a repeated-scalar diagonal block of the given
    dimension).  ``identity``: the channel is the exact identity, used
    when a certain interconnection is written as a degenerate
    uncertainty.
    """

    __slots__ = ("kind", "dim")

    def __init__(self, kind, dim):
        if kind not in UNCERTAINTY_KINDS:
            raise ValueError("unknown uncertainty kind %r" % (kind,))
        dim = int(dim)
        if dim < 0 or (kind == "normalized_scalar_gain" and dim < 1):
            raise ValueError("uncertainty dimension must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "dim", dim)

    def __setattr__(self, *a):
        raise AttributeError("UncertaintySpec is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, UncertaintySpec)
            and self.kind == other.kind
            and self.dim == other.dim
        )

    def __repr__(self):
        return "UncertaintySpec(kind=%r, dim=%d)" % (self.kind, self.dim)


class Subsystem:
    """One node of the network: four transfer blocks plus an uncertainty.

    Block dimensions: ``g_pq`` is d x d, ``g_pw`` d x m, ``g_zq`` l x d,
    ``g_zw`` l x m, and the uncertainty channel has dimension d.
    """

    def __init__(self, g_pq, g_pw, g_zq, g_zw, uncertainty):
        self.g_pq = g_pq
        self.g_pw = g_pw
        self.g_zq = g_zq
        self.g_zw = g_zw
        self.uncertainty = uncertainty
        d = g_pq.n_outputs
        if g_pq.n_inputs != d:
            raise DimensionError("g_pq must be square (d x d)")
        m = g_pw.n_inputs
        l = g_zq.n_outputs
        if g_pw.n_outputs != d:
            raise DimensionError("g_pw must have d=%d outputs" % d)
        if g_zq.n_inputs != d:
            raise DimensionError("g_zq must have d=%d inputs" % d)
        if g_zw.n_outputs != l or g_zw.n_inputs != m:
            raise DimensionError("g_zw must be l x m = %d x %d" % (l, m))
        if uncertainty.dim != d:
            raise DimensionError(
                "uncertainty dimension %d does not match d=%d" % (uncertainty.dim, d)
            )
        self.d = d
        self.m = m
        self.l = l

    def blocks(self):
        return (self.g_pq, self.g_pw, self.g_zq, self.g_zw)

    def __repr__(self):
        return "Subsystem(d=%d, m=%d, l=%d, %s)" % (
            self.d,
            self.m,
            self.l,
            self.uncertainty.kind,
        )


def _block_diag(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def _offsets(sizes):
    off = [0]
    for s in sizes:
        off.append(off[-1] + s)
    return off


class Network:
    """Interconnected uncertain system: subsystems plus the routing matrix.

    ``gamma`` accepts either a dense 0-1 array of shape
    ``(sum m_i, sum l_i)`` or an ``(rows, cols, entries)`` triple with
    ``entries`` an iterable of 0-based ``(row, col)`` pairs, each standing
    for a stored 1.
    """

    def __init__(self, subsystems, gamma):
        subsystems = tuple(subsystems)
        if not subsystems:
            raise ValueError("network needs at least one subsystem")
        self.subsystems = subsystems
        self.d_dims = tuple(s.d for s in subsystems)
        self.m_dims = tuple(s.m for s in subsystems)
        self.l_dims = tuple(s.l for s in subsystems)
        self.d_total = sum(self.d_dims)
        self.m_total = sum(self.m_dims)
        self.l_total = sum(self.l_dims)
        self.q_offsets = tuple(_offsets(self.d_dims))
        self.w_offsets = tuple(_offsets(self.m_dims))
        self.z_offsets = tuple(_offsets(self.l_dims))
        rows, cols, entries = self._parse_gamma(gamma)
        if rows != self.m_total or cols != self.l_total:
            raise DimensionError(
                "gamma is %dx%d, expected %dx%d"
                % (rows, cols, self.m_total, self.l_total)
            )
        self.gamma_entries = entries

    @staticmethod
    def _parse_gamma(gamma):
        if isinstance(gamma, tuple) and len(gamma) == 3:
            rows, cols, pairs = gamma
            entries = []
            seen = set()
            for r, c in pairs:
                r, c = int(r), int(c)
                if not (0 <= r < rows and 0 <= c < cols):
                    raise DimensionError("gamma entry (%d, %d) out of range" % (r, c))
                if (r, c) in seen:
                    raise ValueError("duplicate gamma entry (%d, %d)" % (r, c))
                seen.add((r, c))
                entries.append((r, c))
            return int(rows), int(cols), tuple(sorted(entries))
        arr = np.asarray(gamma, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError("gamma must be a matrix")
        bad = np.argwhere((arr != 0.0) & (arr != 1.0))
        if bad.size:
            raise ValueError(
                "non-0-1 entry in gamma at (%d, %d)" % (bad[0][0], bad[0][1])
            )
        entries = tuple(sorted((int(r), int(c)) for r, c in np.argwhere(arr == 1.0)))
        return arr.shape[0], arr.shape[1], entries

    @property
    def n_subsystems(self):
        return len(self.subsystems)

    def gamma_dense(self):
        g = np.zeros((self.m_total, self.l_total))
        for r, c in self.gamma_entries:
            g[r, c] = 1.0
        return g

    def owner_of_w(self, r):
        """Subsystem index owning stacked input channel ``w_r``."""
        for i in range(self.n_subsystems):
            if self.w_offsets[i] <= r < self.w_offsets[i + 1]:
                return i
        raise IndexError(r)

    def owner_of_z(self, s):
        for i in range(self.n_subsystems):
            if self.z_offsets[i] <= s < self.z_offsets[i + 1]:
                return i
        raise IndexError(s)

    def owner_of_q(self, k):
        for i in range(self.n_subsystems):
            if self.q_offsets[i] <= k < self.q_offsets[i + 1]:
                return i
        raise IndexError(k)

    def w_sources(self, r):
        """Subsystems whose outputs feed stacked input channel ``w_r``."""
        return tuple(
            sorted({self.owner_of_z(c) for rr, c in self.gamma_entries if rr == r})
        )

    def interconnection_edges(self):
        """Subsystem-level (i, j) pairs coupled through gamma."""
        edges = set()
        for r, c in self.gamma_entries:
            i, j = self.owner_of_w(r), self.owner_of_z(c)
            if i != j:
                edges.add((min(i, j), max(i, j)))
        return tuple(sorted(edges))

    def g_pq(self, omega):
        return _block_diag([eval_frequency(s.g_pq, omega) for s in self.subsystems])

    def g_pw(self, omega):
        return _block_diag([eval_frequency(s.g_pw, omega) for s in self.subsystems])

    def g_zq(self, omega):
        return _block_diag([eval_frequency(s.g_zq, omega) for s in self.subsystems])

    def g_zw(self, omega):
        return _block_diag([eval_frequency(s.g_zw, omega) for s in self.subsystems])

    def __repr__(self):
        return "Network(N=%d, links=%d)" % (self.n_subsystems, len(self.gamma_entries))


def build_network(subsystems, gamma):
    """Validated :class:`Network` with stacked block index maps."""
    return Network(subsystems, gamma)


def loop_matrix(net, omega):
    """``I - Gamma G_zw(jw)``, whose bounded invertibility is well-posedness."""
    return np.eye(net.m_total, dtype=np.complex128) - net.gamma_dense() @ net.g_zw(
        omega
    )


def _sigma_min(m):
    if m.size == 0:
        return math.inf
    gram = m.conj().T @ m
    w, _ = numerics.herm_eig(0.5 * (gram + gram.conj().T))
    return math.sqrt(max(float(w[0]), 0.0))


def lumped_transfer(net, omega, sigma_min_tol=1e-6):
    """Transfer matrix after eliminating the interconnection constraint.

    ``G_pq + G_pw (I - Gamma G_zw)^{-1} Gamma G_zq`` evaluated at
    ``omega``; raises :class:`WellPosednessError` when the loop matrix is
    numerically singular.
    """
    if net.m_total == 0:
        return net.g_pq(omega)
    m = loop_matrix(net, omega)
    smin = _sigma_min(m)
    if smin <= sigma_min_tol:
        raise WellPosednessError(
            "interconnection is ill-posed at omega=%r (sigma_min=%g)" % (omega, smin),
            omega=omega,
            sigma_min=smin,
        )
    x = numerics.solve_dense(m, net.gamma_dense() @ net.g_zq(omega))
    return net.g_pq(omega) + net.g_pw(omega) @ x


class WellPosednessReport:
    """Per-frequency smallest singular values of the loop matrix."""

    def __init__(self, records, tol):
        self.records = tuple(records)
        self.tol = tol

    @property
    def passed(self):
        return all(s > self.tol for _, s in self.records)

    def __repr__(self):
        worst = min(s for _, s in self.records) if self.records else math.inf
        return "WellPosednessReport(passed=%s, worst=%g)" % (self.passed, worst)


def check_well_posed(net, grid, sigma_min_tol=1e-6):
    """Smallest singular value of ``I - Gamma G_zw`` at each grid point."""
    records = []
    for omega in grid:
        records.append((omega, _sigma_min(loop_matrix(net, omega))))
    return WellPosednessReport(records, sigma_min_tol)


class AugmentedNetwork:
    """Network whose interconnection is routed through uncertainty channels.

    Each subsystem gains an input channel ``p_A^i = w^i`` and an output
    channel ``q_A^i`` with ``q_A^i = interconnection_uncertainty[i](p_A^i)``;
    the directly interconnected transfer matrix becomes
    ``[[G_pq, G_pw], [Gamma G_zq, Gamma G_zw]]``, which stays sparse when
    gamma is sparse.
    """

    def __init__(self, base, interconnection_uncertainty):
        specs = tuple(interconnection_uncertainty)
        if len(specs) != base.n_subsystems:
            raise DimensionError(
                "expected %d interconnection uncertainty specs, got %d"
                % (base.n_subsystems, len(specs))
            )
        for i, spec in enumerate(specs):
            if spec.dim != base.m_dims[i]:
                raise DimensionError(
                    "interconnection spec %d has dim %d, expected m_%d=%d"
                    % (i, spec.dim, i, base.m_dims[i])
                )
        self.base = base
        self.interconnection_uncertainty = specs

    def g_tilde(self, omega):
        net = self.base
        top = np.hstack([net.g_pq(omega), net.g_pw(omega)])
        gam = net.gamma_dense()
        bottom = np.hstack([gam @ net.g_zq(omega), gam @ net.g_zw(omega)])
        return np.vstack([top, bottom])

    def subsystem_augmented_blocks(self, i, omega):
        """Per-subsystem augmented block values (fixed zero pattern)."""
        sub = self.base.subsystems[i]
        gpq = eval_frequency(sub.g_pq, omega)
        gpw = eval_frequency(sub.g_pw, omega)
        gzq = eval_frequency(sub.g_zq, omega)
        gzw = eval_frequency(sub.g_zw, omega)
        d, m = sub.d, sub.m
        pbar_qbar = np.zeros((d + m, d + m), dtype=np.complex128)
        pbar_qbar[:d, :d] = gpq
        pbar_qbar[:d, d:] = gpw
        pbar_w = np.zeros((d + m, m), dtype=np.complex128)
        pbar_w[d:, :] = np.eye(m)
        z_qbar = np.hstack([gzq, gzw])
        return {"pbar_qbar": pbar_qbar, "pbar_w": pbar_w, "z_qbar": z_qbar}

    def __repr__(self):
        return "AugmentedNetwork(base=%r)" % (self.base,)


def augment(net, specs):
    """Attach interconnection uncertainty channels to every subsystem."""
    return AugmentedNetwork(net, specs)


class StabilityScan:
    """Outcome of a brute-force closed-loop stability scan."""

    def __init__(self, robustly_stable, counterexample=None, kind=None, checked=0):
        self.robustly_stable = robustly_stable
        self.counterexample = counterexample
        self.kind = kind  # "unstable" or "ill_posed" when a counterexample exists
        self.checked = checked

    def __repr__(self):
        if self.robustly_stable:
            return "StabilityScan(robustly_stable_on_grid, checked=%d)" % self.checked
        return "StabilityScan(counterexample=%s, kind=%s)" % (
            self.counterexample,
            self.kind,
        )


def _stacked_realization(net):
    """Direct sum of all block realizations with shared (q, w) inputs."""
    a_blocks, bq_rows, bw_rows = [], [], []
    cp_cols, cz_cols = [], []
    state_offsets = []
    total_states = 0
    layout = []
    for sub in net.subsystems:
        row = {}
        for name, blk in zip(("pq", "pw", "zq", "zw"), sub.blocks()):
            row[name] = (total_states, blk)
            state_offsets.append(total_states)
            total_states += blk.n_states
        layout.append(row)
    a = np.zeros((total_states, total_states))
    b_q = np.zeros((total_states, net.d_total))
    b_w = np.zeros((total_states, net.m_total))
    c_p = np.zeros((net.d_total, total_states))
    c_z = np.zeros((net.l_total, total_states))
    d_pq = np.zeros((net.d_total, net.d_total))
    d_pw = np.zeros((net.d_total, net.m_total))
    d_zq = np.zeros((net.l_total, net.d_total))
    d_zw = np.zeros((net.l_total, net.m_total))
    for i, sub in enumerate(net.subsystems):
        q0, w0 = net.q_offsets[i], net.w_offsets[i]
        p0, z0 = net.q_offsets[i], net.z_offsets[i]
        for name, (off, blk) in layout[i].items():
            ns = blk.n_states
            if ns:
                a[off : off + ns, off : off + ns] = blk.a
            in0 = q0 if name in ("pq", "zq") else w0
            in_dim = sub.d if name in ("pq", "zq") else sub.m
            out0 = p0 if name in ("pq", "pw") else z0
            out_dim = sub.d if name in ("pq", "pw") else sub.l
            if ns:
                if name in ("pq", "zq"):
                    b_q[off : off + ns, in0 : in0 + in_dim] = blk.b
                else:
                    b_w[off : off + ns, in0 : in0 + in_dim] = blk.b
                if name in ("pq", "pw"):
                    c_p[out0 : out0 + out_dim, off : off + ns] = blk.c
                else:
                    c_z[out0 : out0 + out_dim, off : off + ns] = blk.c
            dmat = {"pq": d_pq, "pw": d_pw, "zq": d_zq, "zw": d_zw}[name]
            dmat[out0 : out0 + out_dim, in0 : in0 + in_dim] = blk.d
    return a, b_q, b_w, c_p, c_z, d_pq, d_pw, d_zq, d_zw


def make_delta_grid(net, points_per_gain=21, cap=10**6, seed=0):
    """Cartesian grid over all scalar gains, subsampled beyond ``cap``."""
    n = net.n_subsystems
    axis = np.linspace(-1.0, 1.0, points_per_gain)
    total = points_per_gain**n
    if total <= cap:
        return [np.array(c) for c in itertools.product(axis, repeat=n)]
    rng = np.random.default_rng(seed)
    return [axis[rng.integers(0, points_per_gain, size=n)] for _ in range(cap)]


def brute_force_stability(net, delta_grid=None, points_per_gain=21, cap=10**6, seed=0):
    """Scan constant gains, closing the loop on the stacked realization.

    For each gain vector the algebraic loop ``q = delta p``, ``w = Gamma z``
    is solved and the closed-loop state matrix checked for Hurwitz
    stability.  Returns the first destabilizing (or ill-posed) gain
    vector found, else reports robust stability on the grid.  This is an
    exhaustive oracle for desk-scale acceptance checks, not part of the
    certification path.
    """
    for sub in net.subsystems:
        if sub.uncertainty.kind != "normalized_scalar_gain":
            raise ValueError(
                "brute-force scan requires normalized_scalar_gain uncertainties"
            )
    if delta_grid is None:
        delta_grid = make_delta_grid(net, points_per_gain, cap, seed)
    a, b_q, b_w, c_p, c_z, d_pq, d_pw, d_zq, d_zw = _stacked_realization(net)
    gam = net.gamma_dense()
    n_q, n_w = net.d_total, net.m_total
    checked = 0
    for delta in delta_grid:
        delta = np.asarray(delta, dtype=np.float64)
        if delta.shape != (net.n_subsystems,):
            raise DimensionError("delta vector has wrong length")
        dvec = np.concatenate(
            [np.full(net.d_dims[i], delta[i]) for i in range(net.n_subsystems)]
        )
        ddiag = np.diag(dvec)
        loop = np.zeros((n_q + n_w, n_q + n_w))
        loop[:n_q, :n_q] = np.eye(n_q) - ddiag @ d_pq
        loop[:n_q, n_q:] = -ddiag @ d_pw
        loop[n_q:, :n_q] = -gam @ d_zq
        loop[n_q:, n_q:] = np.eye(n_w) - gam @ d_zw
        rhs = np.vstack([ddiag @ c_p, gam @ c_z])
        checked += 1
        try:
            qw = numerics.solve_dense(loop, rhs)
        except Exception:
            return StabilityScan(
                False, counterexample=delta.copy(), kind="ill_posed", checked=checked
            )
        a_cl = a + np.hstack([b_q, b_w]) @ qw
        if a_cl.size and np.max(np.linalg.eigvals(a_cl).real) >= 0.0:
            return StabilityScan(
                False, counterexample=delta.copy(), kind="unstable", checked=checked
            )
    return StabilityScan(True, checked=checked)


def _state_space_to_json(ss):
    return {
        "A": ss.a.tolist(),
        "B": ss.b.tolist(),
        "C": ss.c.tolist(),
        "D": ss.d.tolist(),
    }


def _state_space_from_json(obj):
    return StateSpace(obj["A"], obj["B"], obj["C"], obj["D"])


def network_to_json(net):
    """JSON-serializable dict in the documented network file schema."""
    return {
        "subsystems": [
            {
                "pq": _state_space_to_json(s.g_pq),
                "pw": _state_space_to_json(s.g_pw),
                "zq": _state_space_to_json(s.g_zq),
                "zw": _state_space_to_json(s.g_zw),
                "uncertainty": {"kind": s.uncertainty.kind, "dim": s.uncertainty.dim},
            }
            for s in net.subsystems
        ],
        "gamma": {
            "rows": net.m_total,
            "cols": net.l_total,
            "entries": [list(e) for e in net.gamma_entries],
        },
    }


def network_from_json(obj):
    subs = []
    for s in obj["subsystems"]:
        subs.append(
            Subsystem(
                _state_space_from_json(s["pq"]),
                _state_space_from_json(s["pw"]),
                _state_space_from_json(s["zq"]),
                _state_space_from_json(s["zw"]),
                UncertaintySpec(s["uncertainty"]["kind"], s["uncertainty"]["dim"]),
            )
        )
    g = obj["gamma"]
    return Network(subs, (g["rows"], g["cols"], [tuple(e) for e in g["entries"]]))


def save_network(net, path):
    with open(path, "w") as fh:
        json.dump(network_to_json(net), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_network(path):
    with open(path) as fh:
        return network_from_json(json.load(fh))
