"""Unit star graph and potential shapes on it.

The star has a center ``b`` and three unit-length edges ending at tips
``a1, a2, a3``.  Every edge carries the arclength ``s`` in ``[0, 1]`` with
``s = 0`` at the center and ``s = 1`` at the tip.  A potential shape is a
piecewise description of ``Q`` along each edge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidProfile, MalformedConfig, NonZeroMean, UnknownProfile

N_EDGES = 3
LENGTH_TOL = 1e-12
MEAN_TOL = 1e-10


@dataclass(frozen=True)
class Constant:
    c: float


@dataclass(frozen=True)
class Sampled:
    """Tabulated values, interpolated piecewise-linearly.

    Abscissae are measured from the start of the owning segment.
    """

    s: tuple[float, ...]
    v: tuple[float, ...]

    def __call__(self, x):
        return np.interp(x, self.s, self.v)


SegmentValue = Union[Constant, Sampled]


@dataclass(frozen=True)
class Segment:
    length: float
    value: SegmentValue

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise InvalidProfile(f"segment length must be > 0, got {self.length!r}")
        val = self.value
        if isinstance(val, Constant):
            if not math.isfinite(val.c):
                raise InvalidProfile("segment constant must be finite")
        elif isinstance(val, Sampled):
            s = np.asarray(val.s, dtype=float)
            if len(s) < 2 or len(s) != len(val.v):
                raise InvalidProfile("sampled segment needs >= 2 (s, value) nodes")
            if not np.all(np.diff(s) > 0):
                raise InvalidProfile("sampled abscissae must be strictly increasing")
            if abs(s[0]) > LENGTH_TOL or abs(s[-1] - self.length) > LENGTH_TOL:
                raise InvalidProfile(
                    "sampled abscissae must span the segment "
                    f"[0, {self.length}], got [{s[0]}, {s[-1]}]"
                )
            if not np.all(np.isfinite(val.v)):
                raise InvalidProfile("sampled values must be finite")
        else:
            raise InvalidProfile(f"unsupported segment value {val!r}")

    def integral(self) -> float:
        if isinstance(self.value, Constant):
            return self.value.c * self.length
        # trapezoid rule is exact for the piecewise-linear interpolant
        s = np.asarray(self.value.s)
        v = np.asarray(self.value.v)
        return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(s)))


@dataclass(frozen=True)
class EdgePotential:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise InvalidProfile("edge needs at least one segment")
        total = math.fsum(seg.length for seg in self.segments)
        if abs(total - 1.0) > LENGTH_TOL:
            raise InvalidProfile(f"segment lengths must sum to 1, got {total!r}")

    def integral(self) -> float:
        return math.fsum(seg.integral() for seg in self.segments)

    def __call__(self, s: float) -> float:
        """Value of Q at arclength ``s`` (right-continuous at breakpoints)."""
        start = 0.0
        for seg in self.segments:
            if s < start + seg.length or seg is self.segments[-1]:
                if isinstance(seg.value, Constant):
                    return seg.value.c
                return float(seg.value(s - start))
            start += seg.length
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class PotentialProfile:
    edges: tuple[EdgePotential, ...]
    zero_mean_enforced: bool = field(default=True)

    def __post_init__(self):
        if len(self.edges) != N_EDGES:
            raise InvalidProfile(f"profile needs exactly {N_EDGES} edges, got {len(self.edges)}")
        if self.zero_mean_enforced:
            mean = integrate_potential(self)
            if abs(mean) > MEAN_TOL:
                raise NonZeroMean(f"integral of Q over the star is {mean!r}, expected 0")

    def is_constant(self) -> bool:
        return all(isinstance(seg.value, Constant) for e in self.edges for seg in e.segments)


def integrate_potential(profile: PotentialProfile) -> float:
    """Integral of Q over the whole star (sum of the three edge integrals)."""
    return math.fsum(edge.integral() for edge in profile.edges)


def _segment_from_obj(obj) -> Segment:
    if not isinstance(obj, dict) or "length" not in obj:
        raise MalformedConfig(f"segment must be an object with 'length', got {obj!r}")
    has_const, has_samples = "const" in obj, "samples" in obj
    if has_const == has_samples:
        raise MalformedConfig("segment needs exactly one of 'const' or 'samples'")
    try:
        length = float(obj["length"])
        if has_const:
            value: SegmentValue = Constant(float(obj["const"]))
        else:
            pairs = [(float(s), float(v)) for s, v in obj["samples"]]
            value = Sampled(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
    except (TypeError, ValueError) as exc:
        raise MalformedConfig(f"bad segment {obj!r}: {exc}") from exc
    return Segment(length, value)


def profile_from_obj(obj) -> PotentialProfile:
    if not isinstance(obj, dict) or not isinstance(obj.get("edges"), list):
        raise MalformedConfig("config must be an object with an 'edges' list")
    edges = []
    for edge in obj["edges"]:
        if not isinstance(edge, dict) or not isinstance(edge.get("segments"), list):
            raise MalformedConfig("each edge must be an object with a 'segments' list")
        edges.append(EdgePotential(tuple(_segment_from_obj(s) for s in edge["segments"])))
    zero_mean = obj.get("zero_mean", True)
    if not isinstance(zero_mean, bool):
        raise MalformedConfig("'zero_mean' must be a boolean")
    return PotentialProfile(tuple(edges), zero_mean)


def parse_profile(config_text: str) -> PotentialProfile:
    """Parse and validate a JSON profile description."""
    try:
        obj = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise MalformedConfig(f"invalid JSON: {exc}") from exc
    return profile_from_obj(obj)


def profile_to_obj(profile: PotentialProfile) -> dict:
    edges = []
    for edge in profile.edges:
        segs = []
        for seg in edge.segments:
            if isinstance(seg.value, Constant):
                segs.append({"length": seg.length, "const": seg.value.c})
            else:
                segs.append({"length": seg.length,
                             "samples": [[s, v] for s, v in zip(seg.value.s, seg.value.v)]})
        edges.append({"segments": segs})
    return {"edges": edges, "zero_mean": profile.zero_mean_enforced}


def serialize_profile(profile: PotentialProfile) -> str:
    return json.dumps(profile_to_obj(profile))


def _rect_edge(height: float = 7.0) -> EdgePotential:
    return EdgePotential((Segment(0.5, Constant(height)), Segment(0.5, Constant(-height))))


def _zero_edge() -> EdgePotential:
    return EdgePotential((Segment(1.0, Constant(0.0)),))


BUILTIN_PROFILES = ("paper-rect", "symmetric-rect")


def builtin_profile(name: str) -> PotentialProfile:
    """Named example profiles.

    ``paper-rect`` carries the +7/-7 rectangle on edge 1 only and vanishes on
    edges 2 and 3.  ``symmetric-rect`` puts the same rectangle on every edge,
    which produces double resonances.
    """
    if name == "paper-rect":
        return PotentialProfile((_rect_edge(), _zero_edge(), _zero_edge()))
    if name == "symmetric-rect":
        return PotentialProfile((_rect_edge(), _rect_edge(), _rect_edge()))
    raise UnknownProfile(f"unknown builtin profile {name!r}; choose from {', '.join(BUILTIN_PROFILES)}")


def builtin_name(profile: PotentialProfile) -> str | None:
    for name in BUILTIN_PROFILES:
        if builtin_profile(name) == profile:
            return name
    return None
