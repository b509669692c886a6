"""The subjective-property/type pair, the unit every stage selects, asks about, and infers over."""

from __future__ import annotations

import re
from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class STPair:
    """A subjective adjective applied to a KB class, e.g. (big, City).

    Identity and ordering are (property, type); support is bookkeeping only.
    """

    property: str
    type: str
    support: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.property:
            raise ValueError("property must be non-empty")
        if not self.type:
            raise ValueError("type must be non-empty")

    @property
    def key(self) -> str:
        """Stable id used in files, graph dumps, and tie-breaking: ``property@Type``."""
        return f"{self.property}@{self.type}"

    @property
    def slug(self) -> str:
        """Filesystem/URL-safe variant of the key."""
        return re.sub(r"[^a-z0-9]+", "-", f"{self.property}-{self.type}".lower()).strip("-")

    def __str__(self):
        return f"({self.property}, {self.type})"


def parse_pair_key(key: str) -> STPair:
    """Inverse of :attr:`STPair.key`. The property never contains ``@``; the type may not either."""
    prop, sep, typ = key.partition("@")
    if not sep or not prop or not typ:
        raise ValueError(f"malformed pair key: {key!r}")
    return STPair(property=prop, type=typ)


def pair_sort_key(pair: STPair):
    """Canonical ordering: descending support, then lexicographic key."""
    return (-pair.support, pair.property, pair.type)
