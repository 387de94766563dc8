"""Piecewise shooting integration of the second-order equation.

Solutions of ``-u'' + q u = lam w u`` are propagated piece by piece with an
adaptive Runge-Kutta integrator; the interface jump conditions are applied
exactly between pieces.  Two distinguished solutions are built here:

* the *left* solution, launched at ``x = -1`` with ``u = sin(alpha)``,
  ``u' = -cos(alpha)``, which satisfies the left boundary condition by
  construction and is carried rightward through the jumps;
* the *right* solution, launched at ``x = +1`` with
  ``u = beta2'*lam + beta2`` and ``u' = beta1'*lam + beta1``, which
  satisfies the eigenvalue-dependent right condition identically and is
  carried leftward through the inverted jumps.

An eigenvalue is a value of ``lam`` where the two are proportional, which
the characteristic-function module detects through their Wronskian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from .problem import (
    NumericalError,
    ProblemSpec,
    Side,
    piece_bounds,
    piece_index_at,
)

__all__ = [
    "State",
    "PieceTrajectory",
    "PiecewiseSolution",
    "integrate_piece",
    "build_left",
    "build_right",
    "wronskian",
]

_RK_METHOD = "DOP853"
#: smallest relative tolerance the stepper accepts without complaint
_RTOL_FLOOR = 3e-14
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class State:
    """Solution value and slope at one point: ``(u, u')``."""

    u: float
    v: float

    def scaled(self, cu: float, cv: float) -> "State":
        return State(cu * self.u, cv * self.v)


def _rhs_single(spec: ProblemSpec, index0: int, lam: float):
    coeffs = spec.q.pieces[index0]
    lam_w = lam * spec.omega[index0] ** 2

    def rhs(x, y):
        qx = 0.0
        for c in reversed(coeffs):
            qx = qx * x + c
        return (y[1], (qx - lam_w) * y[0])

    return rhs


def integrate_piece(
    spec: ProblemSpec,
    lam: float,
    piece: int,
    x_from: float,
    x_to: float,
    init: State,
) -> "PieceTrajectory":
    """Integrate across one piece from ``x_from`` to ``x_to`` (either direction).

    Both endpoints must lie in the closure of piece ``piece`` (1-based).
    Returns a trajectory with a dense interpolant; its ``terminal`` state is
    the solution at ``x_to``.
    """
    if not math.isfinite(lam):
        raise ValueError(f"lam={lam!r} is not finite")
    if not (math.isfinite(init.u) and math.isfinite(init.v)):
        raise ValueError(f"initial state {init!r} is not finite")
    a, b = piece_bounds(spec, piece)
    for name, x in (("x_from", x_from), ("x_to", x_to)):
        if not (a - _EDGE_TOL <= x <= b + _EDGE_TOL):
            raise ValueError(f"{name}={x!r} lies outside piece {piece} = [{a}, {b}]")
    if x_from == x_to:
        raise ValueError("x_from and x_to coincide")

    tol = max(spec.solver.rk_tol, _RTOL_FLOOR)
    sol = solve_ivp(
        _rhs_single(spec, piece - 1, lam),
        (x_from, x_to),
        (init.u, init.v),
        method=_RK_METHOD,
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise NumericalError(
            f"integration failed on piece {piece} at lam={lam!r}: {sol.message}"
        )
    u_end, v_end = sol.y[:, -1]
    return PieceTrajectory(
        piece=piece,
        lam=lam,
        x_start=x_from,
        x_end=x_to,
        initial=init,
        terminal=State(float(u_end), float(v_end)),
        _interp=sol.sol,
        n_steps=len(sol.t) - 1,
    )


@dataclass(frozen=True)
class PieceTrajectory:
    """Dense solution of one piece, queryable anywhere between its endpoints."""

    piece: int
    lam: float
    x_start: float
    x_end: float
    initial: State
    terminal: State
    _interp: object
    n_steps: int

    @property
    def xs(self) -> np.ndarray:
        """Integration nodes in ascending-x order."""
        ts = np.asarray(self._interp.ts, dtype=float)
        return ts if ts[0] <= ts[-1] else ts[::-1]

    def eval(self, x):
        """Value and slope at ``x`` (scalar or array) inside the piece."""
        lo, hi = min(self.x_start, self.x_end), max(self.x_start, self.x_end)
        xv = np.asarray(x, dtype=float)
        if np.any(xv < lo - _EDGE_TOL) or np.any(xv > hi + _EDGE_TOL):
            raise ValueError(f"query outside integrated range [{lo}, {hi}]")
        out = self._interp(np.clip(xv, lo, hi))
        if np.ndim(x) == 0:
            return float(out[0]), float(out[1])
        return out[0], out[1]

    def state(self, x: float) -> State:
        u, v = self.eval(float(x))
        return State(u, v)


@dataclass(frozen=True)
class PiecewiseSolution:
    """A solution of the full problem assembled from three piece trajectories.

    ``kind`` records the launch end ("left" or "right").  One-sided anchor
    states at the interfaces are stored exactly as produced by the launch,
    jump application, and piece terminals -- interpolation is only used for
    interior queries.
    """

    kind: Literal["left", "right"]
    lam: float
    spec: ProblemSpec
    pieces: tuple[PieceTrajectory, PieceTrajectory, PieceTrajectory]
    at_left: State
    h1_minus: State
    h1_plus: State
    h2_minus: State
    h2_plus: State
    at_right: State

    def state(self, x: float, side: Side | None = None) -> State:
        """One-sided solution state at ``x``; anchors are returned exactly."""
        anchors = {
            (-1.0, None): self.at_left,
            (self.spec.h1, "left"): self.h1_minus,
            (self.spec.h1, "right"): self.h1_plus,
            (self.spec.h2, "left"): self.h2_minus,
            (self.spec.h2, "right"): self.h2_plus,
            (1.0, None): self.at_right,
        }
        for (ax, aside), st in anchors.items():
            if abs(x - ax) <= _EDGE_TOL and (aside is None or aside == side):
                if aside is None or side is not None:
                    return st
        index = piece_index_at(self.spec, x, side)
        return self.pieces[index - 1].state(x)

    def eval(self, x, side: Side | None = None):
        """Vectorized value/slope query; ``side`` only matters at interfaces.

        For array input, points sitting exactly on an interface resolve to
        the right piece unless ``side='left'``.
        """
        if np.ndim(x) == 0:
            st = self.state(float(x), side)
            return st.u, st.v
        xv = np.asarray(x, dtype=float)
        edges = np.array([self.spec.h1, self.spec.h2])
        index = np.searchsorted(edges, xv, side="left" if side == "left" else "right")
        u = np.empty_like(xv)
        v = np.empty_like(xv)
        for i in (0, 1, 2):
            mask = index == i
            if np.any(mask):
                uu, vv = self.pieces[i].eval(xv[mask])
                u[mask], v[mask] = uu, vv
        return u, v


def build_left(spec: ProblemSpec, lam: float) -> PiecewiseSolution:
    """Left-launched solution satisfying the ``x = -1`` boundary condition."""
    init = State(math.sin(spec.alpha), -math.cos(spec.alpha))
    t1 = integrate_piece(spec, lam, 1, -1.0, spec.h1, init)
    h1_plus = t1.terminal.scaled(spec.jump_ratio_u[0], spec.jump_ratio_du[0])
    t2 = integrate_piece(spec, lam, 2, spec.h1, spec.h2, h1_plus)
    h2_plus = t2.terminal.scaled(spec.jump_ratio_u[1], spec.jump_ratio_du[1])
    t3 = integrate_piece(spec, lam, 3, spec.h2, 1.0, h2_plus)
    return PiecewiseSolution(
        kind="left", lam=lam, spec=spec, pieces=(t1, t2, t3),
        at_left=init, h1_minus=t1.terminal, h1_plus=h1_plus,
        h2_minus=t2.terminal, h2_plus=h2_plus, at_right=t3.terminal,
    )


def build_right(spec: ProblemSpec, lam: float) -> PiecewiseSolution:
    """Right-launched solution satisfying the eigenvalue-dependent condition.

    The launch data make ``lam*(b1p*u(1) - b2p*u'(1)) + b1*u(1) - b2*u'(1)``
    vanish identically in ``lam``.
    """
    b1, b2 = spec.beta
    b1p, b2p = spec.beta_prime
    init = State(b2p * lam + b2, b1p * lam + b1)
    t3 = integrate_piece(spec, lam, 3, 1.0, spec.h2, init)
    h2_minus = t3.terminal.scaled(1.0 / spec.jump_ratio_u[1], 1.0 / spec.jump_ratio_du[1])
    t2 = integrate_piece(spec, lam, 2, spec.h2, spec.h1, h2_minus)
    h1_minus = t2.terminal.scaled(1.0 / spec.jump_ratio_u[0], 1.0 / spec.jump_ratio_du[0])
    t1 = integrate_piece(spec, lam, 1, spec.h1, -1.0, h1_minus)
    return PiecewiseSolution(
        kind="right", lam=lam, spec=spec, pieces=(t1, t2, t3),
        at_left=t1.terminal, h1_minus=h1_minus, h1_plus=t2.terminal,
        h2_minus=h2_minus, h2_plus=t3.terminal, at_right=init,
    )


def wronskian(
    f: PiecewiseSolution, g: PiecewiseSolution, x: float, side: Side | None = None
) -> float:
    """``f(x) g'(x) - f'(x) g(x)`` with both solutions read on the same side.

    Constant within each piece when ``f`` and ``g`` solve the equation at the
    same ``lam``; refuses to mix different spectral parameters.
    """
    if f.lam != g.lam:
        raise ValueError(f"mismatched spectral parameters: {f.lam!r} vs {g.lam!r}")
    sf = f.state(x, side)
    sg = g.state(x, side)
    return sf.u * sg.v - sf.v * sg.u


# ---------------------------------------------------------------------------
# batched propagation (terminal values only), used by the characteristic scan


def _rhs_batch(spec: ProblemSpec, index0: int, lam_w: np.ndarray):
    coeffs = spec.q.pieces[index0]
    k = lam_w.size

    def rhs(x, y):
        qx = 0.0
        for c in reversed(coeffs):
            qx = qx * x + c
        return np.concatenate((y[k:], (qx - lam_w) * y[:k]))

    return rhs


def left_terminal_batch(
    spec: ProblemSpec, lams: np.ndarray, rtol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Values ``(u, u')`` at ``x = +1`` of the left solution, for many ``lam``.

    All columns share one adaptive step sequence; the controller keeps the
    worst column within tolerance, so individual columns are at least as
    accurate as a lone integration at ``rtol``.
    """
    lams = np.ascontiguousarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("lams must be a nonempty 1-d array")
    if not np.all(np.isfinite(lams)):
        raise ValueError("lams must be finite")
    k = lams.size
    tol = max(rtol, _RTOL_FLOOR)
    u = np.full(k, math.sin(spec.alpha))
    v = np.full(k, -math.cos(spec.alpha))
    bounds = spec.breakpoints
    for i in range(3):
        if i == 1:
            u = u * spec.jump_ratio_u[0]
            v = v * spec.jump_ratio_du[0]
        elif i == 2:
            u = u * spec.jump_ratio_u[1]
            v = v * spec.jump_ratio_du[1]
        sol = solve_ivp(
            _rhs_batch(spec, i, lams * spec.omega[i] ** 2),
            (bounds[i], bounds[i + 1]),
            np.concatenate((u, v)),
            method=_RK_METHOD,
            rtol=tol,
            atol=tol,
        )
        if not sol.success:
            raise NumericalError(
                f"batched integration failed on piece {i + 1}: {sol.message}"
            )
        y = sol.y[:, -1]
        u, v = y[:k].copy(), y[k:].copy()
    return u, v
