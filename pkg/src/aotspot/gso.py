"""Glowworm swarm optimization over a gridded scalar field.

Each glowworm carries a position, a luciferin level that tracks the field
value it sits on, and an adaptive decision range. One iteration applies
three phases to a frozen snapshot of the swarm:

1. luciferin update: l_i <- (1 - rho) * l_i + gamma * y_i, where y_i is the
   field interpolated at the worm's current position (missing data counts
   as 0, which decays luciferin and repels worms from data voids);
2. movement: each worm with a nonempty neighbor set N_i = {j : d_ij < r_i,
   l_j > l_i} picks neighbor j with probability (l_j - l_i) / sum over N_i
   of (l_k - l_i) and steps a fixed distance s toward it;
3. range update: r_i <- min(r_s, max(0, r_i + beta * (n_t - |N_i|))).

All three phases read the same start-of-iteration snapshot (synchronous
update), so within an iteration the per-worm work is order-independent.
The only randomness is the movement roulette; it consumes exactly one
uniform per worm per iteration, drawn from a generator seeded by
(seed, iteration), so runs are reproducible and the stream a worm sees is
independent of how work is scheduled.

The neighbor search buckets worms into a uniform spatial hash with cell
size >= r_s and scans the 3x3 surrounding cells; within a cell, members
are kept sorted by luciferin descending so only the strictly brighter
prefix is examined. The hot loop is JIT-compiled, and its output is
exactly the definitional neighbor sets and selection distribution (the
pure-numpy `neighbors` and `selection_probabilities` serve as the
reference implementation in tests).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import ScalarGrid, values_at


class ParameterError(ValueError):
    """A GsoParams invariant is violated; names the field and its bound."""


@dataclass(frozen=True)
class GsoParams:
    """Algorithm parameter vector, defaulting to the reference values."""

    rho: float = 0.2
    gamma: float = 0.6
    beta: float = 0.08
    n_t: int = 5
    s: float = 0.03
    l_0: float = 2.0
    r_s: float = 0.2
    r_0: float = 0.2
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ParameterError(f"rho must satisfy 0 < rho < 1, got {self.rho}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not self.s > 0:
            raise ParameterError(f"s must be > 0, got {self.s}")
        if not self.l_0 >= 0:
            raise ParameterError(f"l_0 must be >= 0, got {self.l_0}")
        if not self.r_s > 0:
            raise ParameterError(f"r_s must be > 0, got {self.r_s}")
        if not 0 < self.r_0 <= self.r_s:
            raise ParameterError(f"r_0 must satisfy 0 < r_0 <= r_s, got {self.r_0}")
        if not (isinstance(self.n_t, int) and self.n_t >= 1):
            raise ParameterError(f"n_t must be an integer >= 1, got {self.n_t}")
        if not (isinstance(self.iterations, int) and self.iterations >= 1):
            raise ParameterError(f"iterations must be an integer >= 1, got {self.iterations}")


@dataclass
class SwarmState:
    """Swarm snapshot at one iteration.

    positions is (n, 2) lon/lat, luciferin and ranges are (n,). bounds is
    the (lon_min, lon_max, lat_min, lat_max) box positions are clamped to;
    it rides along so movement needs no grid handle. Operations return new
    states and never mutate their input; arrays a phase leaves untouched
    are shared between input and output, so treat state arrays as frozen.
    """

    positions: np.ndarray
    luciferin: np.ndarray
    ranges: np.ndarray
    iteration: int
    bounds: tuple[float, float, float, float]

    def copy(self) -> "SwarmState":
        return SwarmState(
            self.positions.copy(), self.luciferin.copy(), self.ranges.copy(),
            self.iteration, self.bounds,
        )


def init_swarm(grid: ScalarGrid, params: GsoParams) -> SwarmState:
    """One glowworm per valid grid cell, at the cell center.

    Worm order is the grid's row-major order over valid cells (north row
    first), which fixes worm ids for traces and RNG streams.
    """
    rows, cols = np.nonzero(grid.mask)
    lons, lats = grid.cell_centers()
    n = len(rows)
    positions = np.column_stack([lons[cols], lats[rows]])
    return SwarmState(
        positions=positions,
        luciferin=np.full(n, float(params.l_0)),
        ranges=np.full(n, float(params.r_0)),
        iteration=0,
        bounds=(grid.lon_min, grid.lon_max, grid.lat_min, grid.lat_max),
    )


def update_luciferin(state: SwarmState, grid: ScalarGrid, params: GsoParams) -> SwarmState:
    """Decay-plus-enhancement luciferin update at current positions."""
    y = values_at(grid, state.positions)
    y = np.where(np.isnan(y), 0.0, y)
    luciferin = (1.0 - params.rho) * state.luciferin + params.gamma * y
    return SwarmState(state.positions, luciferin, state.ranges, state.iteration, state.bounds)


def neighbors(state: SwarmState, i: int) -> np.ndarray:
    """Indices j with d_ij strictly inside worm i's range and l_j > l_i.

    Definitional O(n) implementation; the run loop uses the hashed kernel,
    which must agree with this exactly.
    """
    d = np.hypot(state.positions[:, 0] - state.positions[i, 0],
                 state.positions[:, 1] - state.positions[i, 1])
    m = (d < state.ranges[i]) & (state.luciferin > state.luciferin[i])
    m[i] = False
    return np.flatnonzero(m)


def selection_probabilities(state: SwarmState, i: int) -> tuple[np.ndarray, np.ndarray]:
    """(neighbor indices, movement probabilities) for worm i.

    Probabilities are the luciferin surpluses normalized over the neighbor
    set; empty arrays when the worm has no brighter neighbor in range.
    """
    nb = neighbors(state, i)
    if len(nb) == 0:
        return nb, np.empty(0)
    w = state.luciferin[nb] - state.luciferin[i]
    return nb, w / w.sum()


@njit(cache=True)
def _select_kernel(px, py, lucif, ranges, ucells, cstart, spx, spy, slf, sidx,
                   ncy, x0, y0, csize, u):
    # Per worm: gather candidates (strictly brighter, strictly inside range)
    # from the 3x3 hash neighborhood, then roulette-select one by walking the
    # cumulative luciferin surplus until it passes u[i] * total. Candidate
    # order is fixed by the cell scan and the per-cell sort, so results are
    # reproducible; the distribution is exactly the normalized surpluses.
    n = px.shape[0]
    ncells = ucells.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    chosen = np.full(n, -1, dtype=np.int64)
    cand_idx = np.empty(n, dtype=np.int64)
    cand_w = np.empty(n, dtype=np.float64)
    for i in range(n):
        r = ranges[i]
        if r <= 0.0:
            continue
        r2 = r * r
        li = lucif[i]
        xi = px[i]
        yi = py[i]
        cx = int((xi - x0) / csize)
        cy = int((yi - y0) / csize)
        cnt = 0
        wsum = 0.0
        for dcx in range(-1, 2):
            tcx = cx + dcx
            for dcy in range(-1, 2):
                tcy = cy + dcy
                if tcy < 0 or tcy >= ncy:
                    continue
                cid = tcx * ncy + tcy
                lo = np.searchsorted(ucells, cid)
                if lo >= ncells or ucells[lo] != cid:
                    continue
                a = cstart[lo]
                b = cstart[lo + 1]
                # members sorted luciferin-descending: find the end of the
                # strictly brighter prefix
                while a < b:
                    mid = (a + b) // 2
                    if slf[mid] > li:
                        a = mid + 1
                    else:
                        b = mid
                for m in range(cstart[lo], a):
                    dx = spx[m] - xi
                    dy = spy[m] - yi
                    if dx * dx + dy * dy < r2:
                        w = slf[m] - li
                        cand_idx[cnt] = sidx[m]
                        cand_w[cnt] = w
                        cnt += 1
                        wsum += w
        counts[i] = cnt
        if cnt == 0:
            continue
        thresh = u[i] * wsum
        pick = cand_idx[cnt - 1]
        acc = 0.0
        for k in range(cnt):
            acc += cand_w[k]
            if acc > thresh:
                pick = cand_idx[k]
                break
        chosen[i] = pick
    return counts, chosen


def _neighbor_phase(state: SwarmState, params: GsoParams, u: np.ndarray):
    """Hash-bucketed neighbor counts and roulette picks for the snapshot."""
    pos = state.positions
    n = pos.shape[0]
    x0, x1, y0, y1 = state.bounds
    # cell size >= r_s so 3x3 cells cover every range ball; cap the cell
    # count so degenerate tiny r_s cannot blow up the hash
    csize = max(params.r_s, (x1 - x0) / 256.0, (y1 - y0) / 256.0)
    ncy = int((y1 - y0) / csize) + 3
    cx = np.floor((pos[:, 0] - x0) / csize).astype(np.int64)
    cy = np.floor((pos[:, 1] - y0) / csize).astype(np.int64)
    cid = cx * ncy + cy
    # sort: cell, then luciferin descending, then position and original
    # index so exact ties break deterministically
    order = np.lexsort((np.arange(n), pos[:, 1], pos[:, 0], -state.luciferin, cid))
    scid = cid[order]
    ucells, ustart = np.unique(scid, return_index=True)
    cstart = np.append(ustart, n).astype(np.int64)
    return _select_kernel(
        np.ascontiguousarray(pos[:, 0]), np.ascontiguousarray(pos[:, 1]),
        state.luciferin, state.ranges, ucells, cstart,
        np.ascontiguousarray(pos[order, 0]), np.ascontiguousarray(pos[order, 1]),
        np.ascontiguousarray(state.luciferin[order]), order.astype(np.int64),
        ncy, x0, y0, csize, np.asarray(u, dtype=np.float64),
    )


def _move_core(state: SwarmState, params: GsoParams, u: np.ndarray):
    """(new positions, neighbor counts) for one synchronous move phase."""
    counts, chosen = _neighbor_phase(state, params, u)
    pos = state.positions
    newpos = pos.copy()
    movers = np.flatnonzero(chosen >= 0)
    if len(movers):
        delta = pos[chosen[movers]] - pos[movers]
        norm = np.hypot(delta[:, 0], delta[:, 1])
        ok = norm > 0.0  # coincident target: stay put this iteration
        sel = movers[ok]
        newpos[sel] = pos[sel] + params.s * (delta[ok] / norm[ok, None])
        x0, x1, y0, y1 = state.bounds
        newpos[:, 0] = np.clip(newpos[:, 0], x0, x1)
        newpos[:, 1] = np.clip(newpos[:, 1], y0, y1)
    return newpos, counts


def move_with_uniforms(state: SwarmState, params: GsoParams, u: np.ndarray) -> SwarmState:
    """Synchronous movement phase with one explicit uniform per worm.

    u[i] drives worm i's roulette. Exposing the uniforms makes the
    synchronous-purity contract testable: permuting worms together with
    their uniforms permutes the resulting state exactly.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (len(state.positions),):
        raise ValueError(f"need one uniform per worm, got shape {u.shape}")
    newpos, _ = _move_core(state, params, u)
    return SwarmState(newpos, state.luciferin, state.ranges, state.iteration, state.bounds)


def move_step(state: SwarmState, params: GsoParams, rng: np.random.Generator) -> SwarmState:
    """Movement phase drawing its uniforms from rng (one per worm)."""
    return move_with_uniforms(state, params, rng.random(len(state.positions)))


def update_ranges(state: SwarmState, params: GsoParams,
                  neighbor_counts: np.ndarray | None = None) -> SwarmState:
    """Adaptive decision-range update.

    neighbor_counts must be |N_i| on the same snapshot the movement phase
    consumed; the run loop passes them in. When omitted they are computed
    from `state` itself, so a standalone caller should pass the pre-move
    snapshot (not the post-move state) to reproduce the loop's semantics.
    """
    if neighbor_counts is None:
        neighbor_counts, _ = _neighbor_phase(state, params, np.zeros(len(state.positions)))
    ranges = np.minimum(
        params.r_s,
        np.maximum(0.0, state.ranges + params.beta * (params.n_t - neighbor_counts)),
    )
    return SwarmState(state.positions, state.luciferin, ranges, state.iteration, state.bounds)


def run(grid: ScalarGrid, params: GsoParams,
        trace: bool = False) -> tuple[SwarmState, list[SwarmState] | None]:
    """Full optimization: init, then `iterations` synchronous iterations.

    Returns the final state and, when trace is set, a list of state copies
    (initial state at index 0, then one per completed iteration). Output is
    a pure function of (grid, params): the per-iteration uniforms come from
    a generator seeded by (params.seed, iteration index).
    """
    state = init_swarm(grid, params)
    n = len(state.positions)
    history: list[SwarmState] | None = [state.copy()] if trace else None
    for t in range(params.iterations):
        lit = update_luciferin(state, grid, params)
        if lit.ranges.max() > 0.0:
            u = np.random.default_rng((params.seed, t)).random(n)
            newpos, counts = _move_core(lit, params, u)
        else:
            newpos, counts = lit.positions, np.zeros(n, dtype=np.int64)
        ranged = update_ranges(lit, params, neighbor_counts=counts)
        state = SwarmState(newpos, lit.luciferin, ranged.ranges, t + 1, state.bounds)
        if history is not None:
            history.append(state.copy())
    return state, history
