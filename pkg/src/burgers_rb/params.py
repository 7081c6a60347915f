"""Sine-series data parametrization and the compliant parameter set.

Free coordinates are ordered as
``nu, A_b0[l], A_b1[l], f_m, A_f[l, p] (row-major), u0m, A_u0[l]``;
``b0m`` and ``b1m`` are derived from the compatibility conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidViscosityError, RangeError


def _tuple(x):
    return tuple(float(v) for v in x)


@dataclass(frozen=True)
class FrequencyStructure:
    omega_b0: tuple = ()
    omega_b1: tuple = ()
    omega_u0: tuple = ()
    omega_fT: tuple = ()
    omega_fS: tuple = ()

    def __post_init__(self):
        for name in ("omega_b0", "omega_b1", "omega_u0", "omega_fT", "omega_fS"):
            values = _tuple(getattr(self, name))
            if not all(np.isfinite(values)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, values)

    @property
    def n_b0(self):
        return len(self.omega_b0)

    @property
    def n_b1(self):
        return len(self.omega_b1)

    @property
    def n_u0(self):
        return len(self.omega_u0)

    @property
    def n_fT(self):
        return len(self.omega_fT)

    @property
    def n_fS(self):
        return len(self.omega_fS)

    @property
    def num_free(self):
        return 3 + self.n_b0 + self.n_b1 + self.n_fT * self.n_fS + self.n_u0

    def to_dict(self):
        return {k: list(getattr(self, k)) for k in ("omega_b0", "omega_b1", "omega_u0", "omega_fT", "omega_fS")}


@dataclass(frozen=True)
class ParameterRanges:
    """Closed interval per free coordinate; vector-valued entries hold one pair per component."""

    nu: tuple
    f_m: tuple
    u0m: tuple
    amp_b0: tuple = ()
    amp_b1: tuple = ()
    amp_f: tuple = ()  # n_fT rows of n_fS pairs
    amp_u0: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nu", _tuple(self.nu))
        object.__setattr__(self, "f_m", _tuple(self.f_m))
        object.__setattr__(self, "u0m", _tuple(self.u0m))
        for name in ("amp_b0", "amp_b1", "amp_u0"):
            object.__setattr__(self, name, tuple(_tuple(p) for p in getattr(self, name)))
        object.__setattr__(self, "amp_f", tuple(tuple(_tuple(p) for p in row) for row in self.amp_f))
        lo, hi = self.bounds()
        if np.any(lo > hi):
            raise RangeError("every range needs min <= max")

    def bounds(self):
        pairs = [self.nu, *self.amp_b0, *self.amp_b1, self.f_m]
        pairs += [p for row in self.amp_f for p in row]
        pairs += [self.u0m, *self.amp_u0]
        arr = np.array(pairs, dtype=float).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def check_structure(self, freq):
        ok = (
            len(self.amp_b0) == freq.n_b0
            and len(self.amp_b1) == freq.n_b1
            and len(self.amp_u0) == freq.n_u0
            and len(self.amp_f) == freq.n_fT
            and all(len(row) == freq.n_fS for row in self.amp_f)
        )
        if not ok:
            raise RangeError("parameter ranges do not match the frequency structure")

    def full_bounds(self, freq):
        """Min/max of every coordinate of the compliant point, derived ones included.

        b1m is affine in (u0m, A_u0) so its extremes sit at box corners.
        """
        lo, hi = self.bounds()
        nb0, nb1 = freq.n_b0, freq.n_b1
        nf = freq.n_fT * freq.n_fS
        nu_r = [(lo[0], hi[0])]
        b0 = list(zip(lo[1:1 + nb0], hi[1:1 + nb0]))
        b1 = list(zip(lo[1 + nb0:1 + nb0 + nb1], hi[1 + nb0:1 + nb0 + nb1]))
        i = 1 + nb0 + nb1
        fm = [(lo[i], hi[i])]
        af = list(zip(lo[i + 1:i + 1 + nf], hi[i + 1:i + 1 + nf]))
        j = i + 1 + nf
        u0m = (lo[j], hi[j])
        au0 = list(zip(lo[j + 1:], hi[j + 1:]))
        s = np.sin(np.array(freq.omega_u0))
        b1_lo = u0m[0] + sum(min(c * a, c * b) for c, (a, b) in zip(s, au0))
        b1_hi = u0m[1] + sum(max(c * a, c * b) for c, (a, b) in zip(s, au0))
        pairs = nu_r + [u0m] + b0 + [(b1_lo, b1_hi)] + b1 + fm + af + [u0m] + au0
        arr = np.array(pairs, dtype=float)
        return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class ParameterPoint:
    nu: float
    u0m: float
    f_m: float
    amp_b0: np.ndarray
    amp_b1: np.ndarray
    amp_f: np.ndarray
    amp_u0: np.ndarray
    freq: FrequencyStructure = field(repr=False)
    b0m: float = 0.0
    b1m: float = 0.0

    def free_vector(self):
        return np.concatenate(
            [[self.nu], self.amp_b0, self.amp_b1, [self.f_m], self.amp_f.ravel(), [self.u0m], self.amp_u0]
        )

    def coordinates(self):
        """Every coordinate of mu, in the order nu, b0m, A_b0, b1m, A_b1, f_m, A_f, u0m, A_u0."""
        return np.concatenate(
            [[self.nu, self.b0m], self.amp_b0, [self.b1m], self.amp_b1, [self.f_m],
             self.amp_f.ravel(), [self.u0m], self.amp_u0]
        )

    def b0(self, t):
        return self.b0m + np.dot(self.amp_b0, np.sin(np.multiply.outer(self.freq.omega_b0, t)))

    def b1(self, t):
        return self.b1m + np.dot(self.amp_b1, np.sin(np.multiply.outer(self.freq.omega_b1, t)))

    def u0(self, x):
        return self.u0m + np.dot(self.amp_u0, np.sin(np.multiply.outer(self.freq.omega_u0, x)))

    def source_weights(self, t):
        """Per spatial mode p: sum over l of A_f[l, p] sin(omega_fT[l] t)."""
        return np.sin(np.asarray(self.freq.omega_fT) * t) @ self.amp_f

    def f(self, t, x):
        x = np.asarray(x, dtype=float)
        modes = np.sin(np.multiply.outer(x, self.freq.omega_fS))
        return self.f_m + modes @ self.source_weights(t)


def make_parameter_point(raw, freq, ranges=None):
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (freq.num_free,):
        raise RangeError(f"expected {freq.num_free} free coordinates, got {raw.shape}")
    if raw[0] <= 0:
        raise InvalidViscosityError(f"viscosity must be positive, got {raw[0]}")
    if ranges is not None:
        ranges.check_structure(freq)
        lo, hi = ranges.bounds()
        bad = np.flatnonzero((raw < lo) | (raw > hi))
        if bad.size:
            i = bad[0]
            raise RangeError(f"coordinate {i} = {raw[i]} outside [{lo[i]}, {hi[i]}]")
    nb0, nb1, nf = freq.n_b0, freq.n_b1, freq.n_fT * freq.n_fS
    i = 1
    amp_b0 = raw[i:i + nb0]
    i += nb0
    amp_b1 = raw[i:i + nb1]
    i += nb1
    f_m = raw[i]
    amp_f = raw[i + 1:i + 1 + nf].reshape(freq.n_fT, freq.n_fS)
    i += 1 + nf
    u0m = raw[i]
    amp_u0 = raw[i + 1:]
    b1m = u0m + float(np.dot(amp_u0, np.sin(freq.omega_u0)))
    return ParameterPoint(
        nu=float(raw[0]), u0m=float(u0m), f_m=float(f_m),
        amp_b0=amp_b0.copy(), amp_b1=amp_b1.copy(), amp_f=amp_f.copy(), amp_u0=amp_u0.copy(),
        freq=freq, b0m=float(u0m), b1m=b1m,
    )


@dataclass(frozen=True)
class DataFunctions:
    b0: callable
    b1: callable
    f: callable
    u0: callable


def eval_data(mu, freq=None):
    if freq is not None and freq != mu.freq:
        raise RangeError("parameter point was built for a different frequency structure")
    return DataFunctions(b0=mu.b0, b1=mu.b1, f=mu.f, u0=mu.u0)


def sample_parameters(ranges, freq, count, seed):
    ranges.check_structure(freq)
    lo, hi = ranges.bounds()
    rng = np.random.default_rng(seed)
    raw = lo + (hi - lo) * rng.random((count, lo.size))
    return [make_parameter_point(r, freq, ranges) for r in raw]
