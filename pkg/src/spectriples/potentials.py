"""Named potential presets for the zeroth-order coefficient q."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig


@dataclass(frozen=True)
class Potential:
    """A bounded real potential q(x) built from a named preset.

    Presets: ``constant(value)``, ``well(depth, width, background, start)``
    (q = background - depth on [start, start + width]), ``mathieu(amplitude,
    shift)`` (q = amplitude cos 2x + shift) and ``tabulated(x, values)``
    (piecewise-linear, constant beyond the table).
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, value=1.0):
        return cls("constant", {"value": float(value)})

    @classmethod
    def well(cls, depth, width, background=1.0, start=0.0):
        if width <= 0:
            raise InvalidConfig("well width must be positive")
        return cls("well", {"depth": float(depth), "width": float(width),
                            "background": float(background), "start": float(start)})

    @classmethod
    def mathieu(cls, amplitude=2.0, shift=3.0):
        return cls("mathieu", {"amplitude": float(amplitude), "shift": float(shift)})

    @classmethod
    def tabulated(cls, x, values):
        x = tuple(float(v) for v in x)
        values = tuple(float(v) for v in values)
        if len(x) != len(values) or len(x) < 2:
            raise InvalidConfig("tabulated potential needs matching x/values with >= 2 points")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise InvalidConfig("tabulated potential abscissae must be strictly increasing")
        return cls("tabulated", {"x": x, "values": values})

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.full_like(x, p["value"])
        if self.kind == "well":
            inside = (x >= p["start"]) & (x <= p["start"] + p["width"])
            return np.where(inside, p["background"] - p["depth"], p["background"])
        if self.kind == "mathieu":
            return p["amplitude"] * np.cos(2.0 * x) + p["shift"]
        if self.kind == "tabulated":
            return np.interp(x, p["x"], p["values"])
        raise InvalidConfig(f"unknown potential preset {self.kind!r}")

    def lower_bound(self):
        p = self.params
        if self.kind == "constant":
            return p["value"]
        if self.kind == "well":
            return min(p["background"], p["background"] - p["depth"])
        if self.kind == "mathieu":
            return p["shift"] - abs(p["amplitude"])
        return min(p["values"])

    def at_infinity(self):
        """Value q approaches for large x, or None when it does not settle."""
        p = self.params
        if self.kind == "constant":
            return p["value"]
        if self.kind == "well":
            return p["background"]
        if self.kind == "tabulated":
            return p["values"][-1]
        return None


def as_potential(q):
    if isinstance(q, Potential):
        return q
    if np.isscalar(q):
        return Potential.constant(float(q))
    raise InvalidConfig(f"cannot interpret {q!r} as a potential")
