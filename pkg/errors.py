# errors.py

class SolitonLabError(Exception):
    """Base class for every failure raised by the laboratory modules."""

    def details(self):
        return {}


class SuperluminalVelocityError(SolitonLabError, ValueError):
    def __init__(self, speed):
        self.speed = float(speed)
        super().__init__(f"superluminal velocity: |v| = {self.speed!r}")

    def details(self):
        return {"speed": self.speed}


class NoBracketError(SolitonLabError):
    """
    Raised when the initial-value sweep finds no sign change of the shooting
    classifier. Carries the swept interval and the node counts seen on it.
    """

    def __init__(self, message, interval=None, counts=None):
        self.interval = tuple(interval) if interval is not None else None
        self.counts = list(counts) if counts is not None else []
        super().__init__(f"no solution in bracket: {message} (swept {self.interval})")

    def details(self):
        return {"interval": self.interval, "counts": self.counts}


class BracketLostError(NoBracketError):
    def __init__(self, iterate, message, interval=None, counts=None):
        self.iterate = iterate
        super().__init__(f"SCF iterate {iterate}: {message}", interval, counts)

    def details(self):
        return {**super().details(), "iterate": self.iterate}


class ToleranceError(SolitonLabError):
    def __init__(self, message, achieved, tolerance):
        self.achieved = float(achieved)
        self.tolerance = float(tolerance)
        super().__init__(f"tolerance failure: {message} (achieved {self.achieved:.3e}, required {self.tolerance:.1e})")

    def details(self):
        return {"achieved": self.achieved, "tolerance": self.tolerance}


class TailUnderflowError(SolitonLabError):
    def __init__(self, radius):
        self.radius = float(radius)
        super().__init__(f"tail underflow at r = {self.radius:.6g}; shrink R_max")

    def details(self):
        return {"radius": self.radius}


class QuadratureError(SolitonLabError):
    def __init__(self, message, previous, latest):
        self.previous = previous
        self.latest = latest
        super().__init__(f"quadrature did not converge: {message} (last two refinements {previous!r}, {latest!r})")

    def details(self):
        return {"previous": repr(self.previous), "latest": repr(self.latest)}


class ScfDivergenceError(SolitonLabError):
    def __init__(self, message, history):
        self.history = [float(h) for h in history]
        super().__init__(f"SCF divergence: {message}")

    def details(self):
        return {"history": self.history}


class ProfileFormatError(SolitonLabError, ValueError):
    pass


class ConfigError(SolitonLabError, ValueError):
    pass
