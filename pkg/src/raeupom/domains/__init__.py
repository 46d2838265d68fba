"""Concrete domain bundles and the name registry."""
from __future__ import annotations

from ..errors import UnknownDomain
from .base import DomainBundle, EventSpec, ProblemInstance
from .toy import build_toy, build_toy2

_BUILDERS = {
    "toy": build_toy,
    "toy2": build_toy2,
}

try:  # optional bundles register themselves below once their modules exist
    from .snr import build_snr, sr_distance
    _BUILDERS["snr"] = build_snr
except ImportError:  # pragma: no cover
    pass
try:
    from .nav import build_nav
    _BUILDERS["nav"] = build_nav
except ImportError:  # pragma: no cover
    pass
try:
    from .fetch import build_fetch
    _BUILDERS["fetch"] = build_fetch
except ImportError:  # pragma: no cover
    pass

NAMES = tuple(_BUILDERS)


def build(name: str) -> DomainBundle:
    try:
        builder = _BUILDERS[name.lower()]
    except KeyError:
        raise UnknownDomain(name) from None
    return builder()


def gen_problem(bundle: DomainBundle, rng, difficulty: float = 1.0) -> ProblemInstance:
    return bundle.gen_problem(rng, difficulty)


__all__ = ["DomainBundle", "EventSpec", "ProblemInstance", "build", "gen_problem", "NAMES", "sr_distance"]
